// Copyright 2026 The QFw Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qfw/circuit.hpp"
#include "qfw/error.hpp"
#include "qfw/rng.hpp"

/// Dense state-vector simulation. Amplitudes are stored as w equal chunks to
/// model one simulator spread over w workers (gang mode); a gate whose target
/// lies in the high log2(w) index bits pairs amplitudes across chunks and is
/// charged as an exchange. Qubit 0 is the least-significant index bit.
namespace qfw::sv {

inline constexpr std::size_t default_max_qubits = 26;

/// Measured bitstring -> occurrences. Keys list cregs in declaration order,
/// each printed highest bit first, separated by single spaces.
struct Counts {
    std::map<std::string, std::uint64_t> table;
    std::uint64_t shots = 0;

    bool operator==(const Counts&) const = default;

    std::uint64_t operator[](const std::string& key) const
    {
        auto it = table.find(key);
        return it == table.end() ? 0 : it->second;
    }
    double frequency(const std::string& key) const
    {
        return shots == 0 ? 0.0 : static_cast<double>((*this)[key]) / static_cast<double>(shots);
    }
};

/// Exact outcome probabilities keyed like Counts.
using Distribution = std::map<std::string, double>;

struct ExecutionTrace {
    std::uint64_t gates_applied = 0;
    std::uint64_t conditioned_applied = 0;
    std::uint64_t measures = 0;
    std::uint64_t exchanged_amplitudes = 0;
    std::uint64_t seed = 0;

    ExecutionTrace& operator+=(const ExecutionTrace& o)
    {
        gates_applied += o.gates_applied;
        conditioned_applied += o.conditioned_applied;
        measures += o.measures;
        exchanged_amplitudes += o.exchanged_amplitudes;
        return *this;
    }
    bool operator==(const ExecutionTrace&) const = default;
};

/// Renders classical register values in the Counts key format.
inline std::string format_bits(std::span<const ClassicalRegister> cregs, std::span<const std::uint64_t> values)
{
    std::string out;
    for (std::size_t r = 0; r < cregs.size(); ++r) {
        if (r)
            out.push_back(' ');
        for (std::size_t b = cregs[r].size; b-- > 0;)
            out.push_back(((values[r] >> b) & 1U) ? '1' : '0');
    }
    return out;
}

/// Inverse of format_bits.
inline std::vector<std::uint64_t> parse_bits(std::span<const ClassicalRegister> cregs, std::string_view key)
{
    std::vector<std::uint64_t> values(cregs.size(), 0);
    std::size_t pos = 0;
    for (std::size_t r = 0; r < cregs.size(); ++r) {
        if (r) {
            if (pos >= key.size() || key[pos] != ' ')
                throw Error(Errc::validation_error, "malformed bitstring '" + std::string(key) + "'");
            ++pos;
        }
        for (std::size_t b = cregs[r].size; b-- > 0; ++pos) {
            if (pos >= key.size() || (key[pos] != '0' && key[pos] != '1'))
                throw Error(Errc::validation_error, "malformed bitstring '" + std::string(key) + "'");
            if (key[pos] == '1')
                values[r] |= std::uint64_t{1} << b;
        }
    }
    if (pos != key.size())
        throw Error(Errc::validation_error, "malformed bitstring '" + std::string(key) + "'");
    return values;
}

class State {
public:
    State(std::size_t num_qubits, std::size_t workers, std::uint64_t seed = 0,
          std::size_t max_qubits = default_max_qubits)
        : n_(num_qubits), w_(workers), rng_(seed)
    {
        if (n_ < 1 || n_ > max_qubits)
            throw Error(Errc::out_of_range, "qubit count " + std::to_string(n_) + " outside [1, " +
                                                std::to_string(max_qubits) + "]");
        if (w_ == 0 || !std::has_single_bit(w_) || w_ > (std::size_t{1} << n_))
            throw Error(Errc::out_of_range, "worker count " + std::to_string(w_) +
                                                " must be a power of two no larger than 2^" + std::to_string(n_));
        local_bits_ = n_ - static_cast<std::size_t>(std::countr_zero(w_));
        local_mask_ = (std::size_t{1} << local_bits_) - 1;
        chunks_.assign(w_, std::vector<cplx>(std::size_t{1} << local_bits_, cplx{0.0, 0.0}));
        chunks_[0][0] = 1.0;
    }

    std::size_t num_qubits() const noexcept { return n_; }
    std::size_t workers() const noexcept { return w_; }
    std::size_t dimension() const noexcept { return std::size_t{1} << n_; }
    /// Qubits below this index are chunk-local.
    std::size_t local_qubits() const noexcept { return local_bits_; }

    std::span<const cplx> chunk(std::size_t k) const { return chunks_.at(k); }

    cplx amplitude(std::size_t i) const { return chunks_[i >> local_bits_][i & local_mask_]; }

    std::vector<cplx> amplitudes() const
    {
        std::vector<cplx> out;
        out.reserve(dimension());
        for (const auto& ch : chunks_)
            out.insert(out.end(), ch.begin(), ch.end());
        return out;
    }

    /// |amplitude|^2 per basis index.
    std::vector<double> probabilities() const
    {
        std::vector<double> p;
        p.reserve(dimension());
        for (const auto& ch : chunks_)
            for (const auto& a : ch)
                p.push_back(std::norm(a));
        return p;
    }

    double norm_squared() const
    {
        double s = 0.0;
        for (const auto& ch : chunks_)
            for (const auto& a : ch)
                s += std::norm(a);
        return s;
    }

    /// Back to |0...0> with an empty classical store and a fresh stream.
    void reset(std::uint64_t seed)
    {
        for (auto& ch : chunks_)
            std::fill(ch.begin(), ch.end(), cplx{0.0, 0.0});
        chunks_[0][0] = 1.0;
        classical_.clear();
        rng_ = Rng(seed);
    }

    /// True when applying a gate on these qubits pairs amplitudes across chunks.
    bool is_nonlocal(std::span<const std::size_t> qubits) const noexcept
    {
        return std::any_of(qubits.begin(), qubits.end(), [this](std::size_t q) { return q >= local_bits_; });
    }

    void apply_unitary(const Unitary& u, std::span<const std::size_t> qubits)
    {
        if (qubits.size() == 1)
            apply_1q(u, qubits[0]);
        else
            apply_2q(u, qubits[0], qubits[1]);
    }

    /// Probability that qubit q reads 1; accumulated in global index order so
    /// the result does not depend on the chunking.
    double probability_one(std::size_t q) const
    {
        double p1 = 0.0;
        const std::size_t bit = std::size_t{1} << q;
        for (std::size_t k = 0; k < w_; ++k) {
            const std::size_t base = k << local_bits_;
            const auto& ch = chunks_[k];
            for (std::size_t j = 0; j < ch.size(); ++j)
                if ((base + j) & bit)
                    p1 += std::norm(ch[j]);
        }
        return p1;
    }

    /// Projects qubit q onto `outcome` and renormalizes exactly.
    void collapse(std::size_t q, bool outcome)
    {
        const std::size_t bit = std::size_t{1} << q;
        double kept = 0.0;
        for (std::size_t k = 0; k < w_; ++k) {
            const std::size_t base = k << local_bits_;
            auto& ch = chunks_[k];
            for (std::size_t j = 0; j < ch.size(); ++j) {
                if ((((base + j) & bit) != 0) != outcome)
                    ch[j] = 0.0;
                else
                    kept += std::norm(ch[j]);
            }
        }
        const double scale = 1.0 / std::sqrt(kept);
        for (auto& ch : chunks_)
            for (auto& a : ch)
                a *= scale;
    }

    Rng& rng() noexcept { return rng_; }

    std::uint64_t creg_value(const std::string& name) const
    {
        auto it = classical_.find(name);
        return it == classical_.end() ? 0 : it->second;
    }
    void write_bit(const ClassicalBit& b, bool value)
    {
        auto& v = classical_[b.creg];
        const std::uint64_t mask = std::uint64_t{1} << b.index;
        v = value ? (v | mask) : (v & ~mask);
    }
    const std::map<std::string, std::uint64_t>& classical_store() const noexcept { return classical_; }

private:
    cplx& at(std::size_t i) { return chunks_[i >> local_bits_][i & local_mask_]; }

    void apply_1q(const Unitary& u, std::size_t q)
    {
        const cplx m00 = u(0, 0), m01 = u(0, 1), m10 = u(1, 0), m11 = u(1, 1);
        if (q < local_bits_) {
            const std::size_t stride = std::size_t{1} << q;
            for (auto& ch : chunks_) {
                cplx* a = ch.data();
                for (std::size_t block = 0; block < ch.size(); block += 2 * stride)
                    for (std::size_t j = block; j < block + stride; ++j) {
                        const cplx a0 = a[j], a1 = a[j + stride];
                        a[j] = m00 * a0 + m01 * a1;
                        a[j + stride] = m10 * a0 + m11 * a1;
                    }
            }
            return;
        }
        // Partner chunks differ in bit (q - local_bits_) of the chunk index.
        const std::size_t partner = std::size_t{1} << (q - local_bits_);
        for (std::size_t k = 0; k < w_; ++k) {
            if (k & partner)
                continue;
            cplx* lo = chunks_[k].data();
            cplx* hi = chunks_[k | partner].data();
            for (std::size_t j = 0; j < chunks_[k].size(); ++j) {
                const cplx a0 = lo[j], a1 = hi[j];
                lo[j] = m00 * a0 + m01 * a1;
                hi[j] = m10 * a0 + m11 * a1;
            }
        }
    }

    void apply_2q(const Unitary& u, std::size_t q0, std::size_t q1)
    {
        const std::size_t b0 = std::size_t{1} << q0, b1 = std::size_t{1} << q1;
        const std::size_t lo = std::min(q0, q1), hi = std::max(q0, q1);
        const std::size_t quarter = dimension() >> 2;
        for (std::size_t k = 0; k < quarter; ++k) {
            // insert zero bits at positions lo and hi
            std::size_t i = k;
            i = ((i >> lo) << (lo + 1)) | (i & ((std::size_t{1} << lo) - 1));
            i = ((i >> hi) << (hi + 1)) | (i & ((std::size_t{1} << hi) - 1));
            const std::size_t idx[4] = {i, i | b0, i | b1, i | b0 | b1};
            cplx in[4];
            for (int r = 0; r < 4; ++r)
                in[r] = at(idx[r]);
            for (int r = 0; r < 4; ++r) {
                cplx acc = 0.0;
                for (int c = 0; c < 4; ++c)
                    acc += u.m[r * 4 + c] * in[c];
                at(idx[r]) = acc;
            }
        }
    }

    std::size_t n_;
    std::size_t w_;
    std::size_t local_bits_ = 0;
    std::size_t local_mask_ = 0;
    std::vector<std::vector<cplx>> chunks_;
    std::map<std::string, std::uint64_t> classical_;
    Rng rng_;
};

inline State new_state(std::size_t n, std::size_t w, std::size_t max_qubits = default_max_qubits)
{
    return State(n, w, 0, max_qubits);
}

inline bool condition_holds(const State& s, const std::optional<Condition>& cond)
{
    return !cond || s.creg_value(cond->creg) == cond->value;
}

/// Exchange cost charged for one gate on a state of n qubits split w ways.
inline std::uint64_t gate_exchange_cost(std::span<const std::size_t> qubits, std::size_t n, std::size_t w)
{
    const std::size_t local = n - static_cast<std::size_t>(std::countr_zero(w));
    const bool remote = std::any_of(qubits.begin(), qubits.end(), [local](std::size_t q) { return q >= local; });
    return remote ? (std::uint64_t{1} << n) : 0;
}

/// Sum of per-gate exchange costs; measurements are modeled as reductions
/// and cost nothing.
inline std::uint64_t exchange_cost(const Circuit& c, std::size_t n, std::size_t w)
{
    if (w == 0 || !std::has_single_bit(w) || w > (std::size_t{1} << n))
        throw Error(Errc::out_of_range, "worker count must be a power of two no larger than 2^n");
    std::uint64_t total = 0;
    for (const auto& ins : c.instructions)
        if (const auto* g = std::get_if<Gate>(&ins))
            total += gate_exchange_cost(g->qubits, n, w);
    return total;
}

/// Applies one instruction, drawing from the state's generator for
/// measurements and resets. Returns the trace delta.
inline ExecutionTrace apply_instruction(State& s, const Instruction& ins)
{
    ExecutionTrace d;
    if (const auto* g = std::get_if<Gate>(&ins)) {
        if (!condition_holds(s, g->condition))
            return d;
        s.apply_unitary(gate_unitary(g->kind, g->params), g->qubits);
        d.gates_applied = 1;
        d.conditioned_applied = g->condition ? 1 : 0;
        d.exchanged_amplitudes = gate_exchange_cost(g->qubits, s.num_qubits(), s.workers());
    } else if (const auto* m = std::get_if<Measure>(&ins)) {
        const bool bit = s.rng().uniform() < s.probability_one(m->qubit);
        s.collapse(m->qubit, bit);
        s.write_bit(m->bit, bit);
        d.measures = 1;
    } else if (const auto* r = std::get_if<Reset>(&ins)) {
        if (!condition_holds(s, r->condition))
            return d;
        const bool bit = s.rng().uniform() < s.probability_one(r->qubit);
        s.collapse(r->qubit, bit);
        if (bit) {
            const std::size_t q[1] = {r->qubit};
            s.apply_unitary(gate_unitary(GateKind::x, {}), q);
        }
    }
    return d;
}

struct RunResult {
    Counts counts;
    ExecutionTrace trace;
    /// Pre-measurement state for static circuits, last shot's state otherwise.
    State final_state;
};

namespace detail {

inline std::vector<std::uint64_t> store_values(const State& s, const Circuit& c)
{
    std::vector<std::uint64_t> v(c.cregs.size());
    for (std::size_t r = 0; r < c.cregs.size(); ++r)
        v[r] = s.creg_value(c.cregs[r].name);
    return v;
}

/// Creg values produced by terminal measurements of basis state `index`.
inline std::vector<std::uint64_t> terminal_readout(const Circuit& c, std::size_t index)
{
    std::vector<std::uint64_t> v(c.cregs.size(), 0);
    for (const auto& ins : c.instructions)
        if (const auto* m = std::get_if<Measure>(&ins)) {
            const std::size_t r = *c.creg_index(m->bit.creg);
            const std::uint64_t mask = std::uint64_t{1} << m->bit.index;
            v[r] = ((index >> m->qubit) & 1U) ? (v[r] | mask) : (v[r] & ~mask);
        }
    return v;
}

inline std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t shot)
{
    return derive_seed(seed, {stream::shot, shot});
}

} // namespace detail

/// Executes `shots` repetitions. Static circuits are simulated once and
/// sampled from the final distribution; all others run shot by shot with
/// collapse. Shot i always draws from stream derive_seed(seed, {shot, i}),
/// so results are independent of worker count and execution order.
inline RunResult run(const Circuit& c, std::uint64_t shots, std::uint64_t seed, std::size_t workers,
                     std::size_t max_qubits = default_max_qubits)
{
    if (c.num_qubits > max_qubits)
        throw Error(Errc::circuit_too_large, std::to_string(c.num_qubits) + " qubits exceeds the simulator limit of " +
                                                 std::to_string(max_qubits));
    if (shots == 0)
        throw Error(Errc::out_of_range, "shots must be positive");
    // Zero-qubit programs still produce classical output.
    const std::size_t n = std::max<std::size_t>(c.num_qubits, 1);

    RunResult out{{}, {}, State(n, workers, seed, std::max(max_qubits, n))};
    out.trace.seed = seed;
    out.counts.shots = shots;

    if (is_static(c)) {
        for (const auto& ins : c.instructions)
            if (std::holds_alternative<Gate>(ins))
                out.trace += apply_instruction(out.final_state, ins);
        std::uint64_t measures = 0;
        for (const auto& ins : c.instructions)
            measures += std::holds_alternative<Measure>(ins) ? 1 : 0;
        out.trace.measures = measures * shots;

        const auto p = out.final_state.probabilities();
        std::vector<double> cdf(p.size());
        double acc = 0.0;
        std::size_t last_nonzero = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            acc += p[i];
            cdf[i] = acc;
            if (p[i] > 0.0)
                last_nonzero = i;
        }
        std::unordered_map<std::size_t, std::uint64_t> by_index;
        for (std::uint64_t shot = 0; shot < shots; ++shot) {
            const double u = Rng(detail::shot_seed(seed, shot)).uniform() * acc;
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            const std::size_t idx = std::min(static_cast<std::size_t>(it - cdf.begin()), last_nonzero);
            ++by_index[idx];
        }
        for (const auto& [idx, k] : by_index)
            out.counts.table[format_bits(c.cregs, detail::terminal_readout(c, idx))] += k;
        return out;
    }

    for (std::uint64_t shot = 0; shot < shots; ++shot) {
        State& s = out.final_state;
        s.reset(detail::shot_seed(seed, shot));
        for (const auto& ins : c.instructions)
            out.trace += apply_instruction(s, ins);
        ++out.counts.table[format_bits(c.cregs, detail::store_values(s, c))];
    }
    return out;
}

/// Exact outcome distribution. Static circuits are marginalized from one
/// final state; dynamic circuits enumerate every measurement branch.
inline Distribution exact_distribution(const Circuit& c, std::size_t workers = 1,
                                       std::size_t max_qubits = default_max_qubits)
{
    if (c.num_qubits > max_qubits)
        throw Error(Errc::circuit_too_large, "circuit exceeds the simulator limit");
    const std::size_t n = std::max<std::size_t>(c.num_qubits, 1);
    Distribution dist;
    State root(n, workers, 0, std::max(max_qubits, n));

    if (is_static(c)) {
        for (const auto& ins : c.instructions)
            if (std::holds_alternative<Gate>(ins))
                apply_instruction(root, ins);
        const auto p = root.probabilities();
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] > 0.0)
                dist[format_bits(c.cregs, detail::terminal_readout(c, i))] += p[i];
        return dist;
    }

    constexpr double prune = 1e-15;
    std::function<void(State&, std::size_t, double)> walk = [&](State& s, std::size_t pc, double weight) {
        for (; pc < c.instructions.size(); ++pc) {
            const Instruction& ins = c.instructions[pc];
            const Measure* m = std::get_if<Measure>(&ins);
            const Reset* r = std::get_if<Reset>(&ins);
            if (r && !condition_holds(s, r->condition))
                continue;
            if (!m && !r) {
                apply_instruction(s, ins);
                continue;
            }
            const std::size_t q = m ? m->qubit : r->qubit;
            const double p1 = s.probability_one(q);
            for (int outcome = 0; outcome < 2; ++outcome) {
                const double pb = outcome ? p1 : 1.0 - p1;
                if (pb < prune)
                    continue;
                State branch = s;
                branch.collapse(q, outcome == 1);
                if (m)
                    branch.write_bit(m->bit, outcome == 1);
                else if (outcome == 1) {
                    const std::size_t qs[1] = {q};
                    branch.apply_unitary(gate_unitary(GateKind::x, {}), qs);
                }
                walk(branch, pc + 1, weight * pb);
            }
            return;
        }
        dist[format_bits(c.cregs, detail::store_values(s, c))] += weight;
    };
    walk(root, 0, 1.0);
    return dist;
}

} // namespace qfw::sv
