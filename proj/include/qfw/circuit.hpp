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
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qfw/error.hpp"

namespace qfw {

using cplx = std::complex<double>;

enum class GateKind { x, y, z, h, s, sdg, t, tdg, rx, ry, rz, u, cx, cz, swap, id };

inline constexpr std::array<GateKind, 16> all_gate_kinds{
    GateKind::x,  GateKind::y,  GateKind::z,  GateKind::h,  GateKind::s,  GateKind::sdg,
    GateKind::t,  GateKind::tdg, GateKind::rx, GateKind::ry, GateKind::rz, GateKind::u,
    GateKind::cx, GateKind::cz, GateKind::swap, GateKind::id};

constexpr std::string_view gate_name(GateKind kind) noexcept
{
    switch (kind) {
    case GateKind::x: return "x";
    case GateKind::y: return "y";
    case GateKind::z: return "z";
    case GateKind::h: return "h";
    case GateKind::s: return "s";
    case GateKind::sdg: return "sdg";
    case GateKind::t: return "t";
    case GateKind::tdg: return "tdg";
    case GateKind::rx: return "rx";
    case GateKind::ry: return "ry";
    case GateKind::rz: return "rz";
    case GateKind::u: return "u";
    case GateKind::cx: return "cx";
    case GateKind::cz: return "cz";
    case GateKind::swap: return "swap";
    case GateKind::id: return "id";
    }
    return "?";
}

inline std::optional<GateKind> gate_from_name(std::string_view name) noexcept
{
    for (GateKind k : all_gate_kinds)
        if (gate_name(k) == name)
            return k;
    return std::nullopt;
}

/// Number of angle parameters.
constexpr std::size_t gate_param_count(GateKind kind) noexcept
{
    switch (kind) {
    case GateKind::rx:
    case GateKind::ry:
    case GateKind::rz: return 1;
    case GateKind::u: return 3;
    default: return 0;
    }
}

constexpr std::size_t gate_qubit_count(GateKind kind) noexcept
{
    switch (kind) {
    case GateKind::cx:
    case GateKind::cz:
    case GateKind::swap: return 2;
    default: return 1;
    }
}

// ---------------------------------------------------------------------------
// Instructions
// ---------------------------------------------------------------------------

/// Applies iff the register's unsigned value (bit i weighs 2^i) equals value.
struct Condition {
    std::string creg;
    std::uint64_t value = 0;
    bool operator==(const Condition&) const = default;
};

struct Gate {
    GateKind kind = GateKind::id;
    std::vector<double> params;
    std::vector<std::size_t> qubits;
    std::optional<Condition> condition;
    bool operator==(const Gate&) const = default;
};

struct ClassicalBit {
    std::string creg;
    std::size_t index = 0;
    bool operator==(const ClassicalBit&) const = default;
};

struct Measure {
    std::size_t qubit = 0;
    ClassicalBit bit;
    bool operator==(const Measure&) const = default;
};

struct Reset {
    std::size_t qubit = 0;
    std::optional<Condition> condition;
    bool operator==(const Reset&) const = default;
};

struct Barrier {
    std::vector<std::size_t> qubits;
    bool operator==(const Barrier&) const = default;
};

using Instruction = std::variant<Gate, Measure, Reset, Barrier>;

struct ClassicalRegister {
    std::string name;
    std::size_t size = 0;
    bool operator==(const ClassicalRegister&) const = default;
};

/// Registers larger than this cannot be used in conditions or stored as one
/// unsigned value.
inline constexpr std::size_t max_creg_size = 64;

struct Circuit {
    std::size_t num_qubits = 0;
    std::vector<ClassicalRegister> cregs;
    std::vector<Instruction> instructions;

    Circuit() = default;
    explicit Circuit(std::size_t n) : num_qubits(n) {}

    bool operator==(const Circuit&) const = default;

    std::optional<std::size_t> creg_index(std::string_view name) const
    {
        for (std::size_t i = 0; i < cregs.size(); ++i)
            if (cregs[i].name == name)
                return i;
        return std::nullopt;
    }

    // Builder helpers. They do not validate; call validate() when done.
    Circuit& add_creg(std::string name, std::size_t size)
    {
        cregs.push_back({std::move(name), size});
        return *this;
    }
    Circuit& add(GateKind kind, std::vector<std::size_t> qubits, std::vector<double> params = {})
    {
        instructions.emplace_back(Gate{kind, std::move(params), std::move(qubits), std::nullopt});
        return *this;
    }
    Circuit& add_if(std::string creg, std::uint64_t value, GateKind kind, std::vector<std::size_t> qubits,
                    std::vector<double> params = {})
    {
        instructions.emplace_back(
            Gate{kind, std::move(params), std::move(qubits), Condition{std::move(creg), value}});
        return *this;
    }
    Circuit& measure(std::size_t qubit, std::string creg, std::size_t index)
    {
        instructions.emplace_back(Measure{qubit, {std::move(creg), index}});
        return *this;
    }
    Circuit& reset(std::size_t qubit)
    {
        instructions.emplace_back(Reset{qubit, std::nullopt});
        return *this;
    }
    Circuit& barrier(std::vector<std::size_t> qubits)
    {
        instructions.emplace_back(Barrier{std::move(qubits)});
        return *this;
    }
};

/// Checks every structural invariant; throws Error(validation_error) or
/// Error(arity_mismatch) naming the first offending instruction.
inline void validate(const Circuit& c)
{
    auto fail = [](std::size_t idx, const std::string& what) {
        throw Error(Errc::validation_error, "instruction " + std::to_string(idx) + ": " + what);
    };
    for (std::size_t i = 0; i < c.cregs.size(); ++i) {
        const auto& r = c.cregs[i];
        if (r.name.empty())
            throw Error(Errc::validation_error, "empty creg name");
        if (r.size == 0 || r.size > max_creg_size)
            throw Error(Errc::validation_error, "creg '" + r.name + "' size must be in [1, 64]");
        for (std::size_t j = 0; j < i; ++j)
            if (c.cregs[j].name == r.name)
                throw Error(Errc::validation_error, "duplicate creg '" + r.name + "'");
    }
    auto check_qubits = [&](std::size_t idx, std::span<const std::size_t> qs) {
        for (std::size_t a = 0; a < qs.size(); ++a) {
            if (qs[a] >= c.num_qubits)
                fail(idx, "qubit " + std::to_string(qs[a]) + " out of range");
            for (std::size_t b = 0; b < a; ++b)
                if (qs[a] == qs[b])
                    fail(idx, "qubit " + std::to_string(qs[a]) + " used twice");
        }
    };
    auto check_condition = [&](std::size_t idx, const std::optional<Condition>& cond) {
        if (cond && !c.creg_index(cond->creg))
            fail(idx, "condition on undeclared creg '" + cond->creg + "'");
    };
    for (std::size_t idx = 0; idx < c.instructions.size(); ++idx) {
        const Instruction& ins = c.instructions[idx];
        if (const auto* g = std::get_if<Gate>(&ins)) {
            if (g->params.size() != gate_param_count(g->kind))
                throw Error(Errc::arity_mismatch, "instruction " + std::to_string(idx) + ": gate '" +
                                                      std::string(gate_name(g->kind)) + "' takes " +
                                                      std::to_string(gate_param_count(g->kind)) + " parameters");
            if (g->qubits.size() != gate_qubit_count(g->kind))
                fail(idx, "gate '" + std::string(gate_name(g->kind)) + "' takes " +
                              std::to_string(gate_qubit_count(g->kind)) + " qubits");
            check_qubits(idx, g->qubits);
            check_condition(idx, g->condition);
        } else if (const auto* m = std::get_if<Measure>(&ins)) {
            check_qubits(idx, std::span(&m->qubit, 1));
            auto r = c.creg_index(m->bit.creg);
            if (!r)
                fail(idx, "measure into undeclared creg '" + m->bit.creg + "'");
            if (m->bit.index >= c.cregs[*r].size)
                fail(idx, "bit " + m->bit.creg + "[" + std::to_string(m->bit.index) + "] out of range");
        } else if (const auto* r = std::get_if<Reset>(&ins)) {
            check_qubits(idx, std::span(&r->qubit, 1));
            check_condition(idx, r->condition);
        } else {
            check_qubits(idx, std::get<Barrier>(ins).qubits);
        }
    }
}

// ---------------------------------------------------------------------------
// Gate matrices
// ---------------------------------------------------------------------------

/// Row-major 2x2 or 4x4 matrix. For two-qubit gates the local basis index is
/// b0 + 2*b1 where b0 is the state of qubits[0] and b1 that of qubits[1]
/// (little-endian, matching the amplitude layout of the state vector).
struct Unitary {
    std::size_t dim = 2;
    std::array<cplx, 16> m{};

    cplx& operator()(std::size_t r, std::size_t c) { return m[r * dim + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return m[r * dim + c]; }
};

inline Unitary gate_unitary(GateKind kind, std::span<const double> params)
{
    if (params.size() != gate_param_count(kind))
        throw Error(Errc::arity_mismatch, "gate '" + std::string(gate_name(kind)) + "' takes " +
                                              std::to_string(gate_param_count(kind)) + " parameters, got " +
                                              std::to_string(params.size()));
    constexpr double r2 = 0.70710678118654752440;
    const cplx i1{0.0, 1.0};
    Unitary u;
    auto set2 = [&u](cplx a, cplx b, cplx c, cplx d) {
        u.dim = 2;
        u.m = {};
        u(0, 0) = a;
        u(0, 1) = b;
        u(1, 0) = c;
        u(1, 1) = d;
    };
    switch (kind) {
    case GateKind::id: set2(1, 0, 0, 1); break;
    case GateKind::x: set2(0, 1, 1, 0); break;
    case GateKind::y: set2(0, -i1, i1, 0); break;
    case GateKind::z: set2(1, 0, 0, -1); break;
    case GateKind::h: set2(r2, r2, r2, -r2); break;
    case GateKind::s: set2(1, 0, 0, i1); break;
    case GateKind::sdg: set2(1, 0, 0, -i1); break;
    case GateKind::t: set2(1, 0, 0, cplx(r2, r2)); break;
    case GateKind::tdg: set2(1, 0, 0, cplx(r2, -r2)); break;
    case GateKind::rx: {
        const double c = std::cos(params[0] / 2), s = std::sin(params[0] / 2);
        set2(c, cplx(0, -s), cplx(0, -s), c);
        break;
    }
    case GateKind::ry: {
        const double c = std::cos(params[0] / 2), s = std::sin(params[0] / 2);
        set2(c, -s, s, c);
        break;
    }
    case GateKind::rz: set2(std::polar(1.0, -params[0] / 2), 0, 0, std::polar(1.0, params[0] / 2)); break;
    case GateKind::u: {
        // qelib1 u3(theta, phi, lambda)
        const double th = params[0], ph = params[1], la = params[2];
        const double c = std::cos(th / 2), s = std::sin(th / 2);
        set2(c, -std::polar(1.0, la) * s, std::polar(1.0, ph) * s, std::polar(1.0, ph + la) * c);
        break;
    }
    case GateKind::cx:
        u.dim = 4;
        u(0, 0) = 1;
        u(2, 2) = 1;
        u(1, 3) = 1;
        u(3, 1) = 1;
        break;
    case GateKind::cz:
        u.dim = 4;
        u(0, 0) = 1;
        u(1, 1) = 1;
        u(2, 2) = 1;
        u(3, 3) = -1;
        break;
    case GateKind::swap:
        u.dim = 4;
        u(0, 0) = 1;
        u(1, 2) = 1;
        u(2, 1) = 1;
        u(3, 3) = 1;
        break;
    }
    return u;
}

// ---------------------------------------------------------------------------
// Structural metrics
// ---------------------------------------------------------------------------

inline std::size_t gate_count(const Circuit& c) noexcept
{
    return static_cast<std::size_t>(std::count_if(c.instructions.begin(), c.instructions.end(),
                                                  [](const Instruction& i) { return std::holds_alternative<Gate>(i); }));
}

inline bool has_conditionals(const Circuit& c) noexcept
{
    for (const auto& ins : c.instructions) {
        if (const auto* g = std::get_if<Gate>(&ins); g && g->condition)
            return true;
        if (const auto* r = std::get_if<Reset>(&ins); r && r->condition)
            return true;
    }
    return false;
}

/// True when a measurement or reset is followed by further quantum work.
inline bool has_mid_circuit_operations(const Circuit& c) noexcept
{
    bool seen_collapse = false;
    for (const auto& ins : c.instructions) {
        if (std::holds_alternative<Reset>(ins)) {
            if (seen_collapse)
                return true;
            seen_collapse = true;
        } else if (std::holds_alternative<Measure>(ins)) {
            seen_collapse = true;
        } else if (std::holds_alternative<Gate>(ins) && seen_collapse) {
            return true;
        }
    }
    return false;
}

/// A static circuit can be simulated once and sampled: no conditionals, no
/// resets, and no gate after any measurement.
inline bool is_static(const Circuit& c) noexcept
{
    bool measured = false;
    for (const auto& ins : c.instructions) {
        if (const auto* g = std::get_if<Gate>(&ins)) {
            if (measured || g->condition)
                return false;
        } else if (std::holds_alternative<Reset>(ins)) {
            return false;
        } else if (std::holds_alternative<Measure>(ins)) {
            measured = true;
        }
    }
    return true;
}

/// Offset of each creg's first bit in the flattened classical bit space.
inline std::vector<std::size_t> clbit_offsets(const Circuit& c)
{
    std::vector<std::size_t> off(c.cregs.size() + 1, 0);
    for (std::size_t i = 0; i < c.cregs.size(); ++i)
        off[i + 1] = off[i] + c.cregs[i].size;
    return off;
}

/// Longest chain of instructions sharing a qubit or classical-bit wire.
/// Barriers synchronize their qubits at depth 0; a conditioned instruction
/// also occupies every bit of its condition register.
inline std::size_t depth(const Circuit& c)
{
    const auto off = clbit_offsets(c);
    std::vector<std::size_t> level(c.num_qubits + off.back(), 0);
    auto creg_wires = [&](const std::string& name, std::vector<std::size_t>& wires) {
        const std::size_t r = *c.creg_index(name);
        for (std::size_t b = 0; b < c.cregs[r].size; ++b)
            wires.push_back(c.num_qubits + off[r] + b);
    };
    std::vector<std::size_t> wires;
    for (const auto& ins : c.instructions) {
        wires.clear();
        bool counts = true;
        if (const auto* g = std::get_if<Gate>(&ins)) {
            wires = g->qubits;
            if (g->condition)
                creg_wires(g->condition->creg, wires);
        } else if (const auto* m = std::get_if<Measure>(&ins)) {
            wires.push_back(m->qubit);
            wires.push_back(c.num_qubits + off[*c.creg_index(m->bit.creg)] + m->bit.index);
        } else if (const auto* r = std::get_if<Reset>(&ins)) {
            wires.push_back(r->qubit);
            if (r->condition)
                creg_wires(r->condition->creg, wires);
        } else {
            wires = std::get<Barrier>(ins).qubits;
            counts = false;
        }
        std::size_t l = 0;
        for (auto w : wires)
            l = std::max(l, level[w]);
        if (counts)
            ++l;
        for (auto w : wires)
            level[w] = l;
    }
    return level.empty() ? 0 : *std::max_element(level.begin(), level.end());
}

namespace detail {

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x)
    {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
    /// Groups sorted by smallest member, members ascending.
    std::vector<std::vector<std::size_t>> groups()
    {
        std::vector<std::vector<std::size_t>> out;
        std::vector<std::size_t> slot(parent.size(), SIZE_MAX);
        for (std::size_t i = 0; i < parent.size(); ++i) {
            const std::size_t r = find(i);
            if (slot[r] == SIZE_MAX) {
                slot[r] = out.size();
                out.emplace_back();
            }
            out[slot[r]].push_back(i);
        }
        return out;
    }
};

inline const std::optional<Condition>* condition_of(const Instruction& ins)
{
    if (const auto* g = std::get_if<Gate>(&ins))
        return &g->condition;
    if (const auto* r = std::get_if<Reset>(&ins))
        return &r->condition;
    return nullptr;
}

inline void couple_qubits(const Circuit& c, DisjointSets& ds)
{
    // Measured qubits per creg, for feed-forward coupling.
    std::vector<std::vector<std::size_t>> writers(c.cregs.size());
    for (const auto& ins : c.instructions)
        if (const auto* m = std::get_if<Measure>(&ins))
            writers[*c.creg_index(m->bit.creg)].push_back(m->qubit);

    for (const auto& ins : c.instructions) {
        if (const auto* g = std::get_if<Gate>(&ins))
            for (std::size_t k = 1; k < g->qubits.size(); ++k)
                ds.unite(g->qubits[0], g->qubits[k]);
        const auto* cond = condition_of(ins);
        if (!cond || !*cond)
            continue;
        const auto& targets = std::holds_alternative<Gate>(ins) ? std::get<Gate>(ins).qubits
                                                                : std::vector<std::size_t>{std::get<Reset>(ins).qubit};
        for (std::size_t w : writers[*c.creg_index((*cond)->creg)])
            for (std::size_t t : targets)
                ds.unite(t, w);
    }
}

} // namespace detail

/// Connected components of the qubit interaction graph. Qubits are coupled by
/// multi-qubit gates and by classical feed-forward (an instruction on a
/// conditioned on a creg that receives any measurement of b).
inline std::vector<std::vector<std::size_t>> interaction_components(const Circuit& c)
{
    detail::DisjointSets ds(c.num_qubits);
    detail::couple_qubits(c, ds);
    return ds.groups();
}

/// Maps one classical bit of a subcircuit back to the original layout.
struct BitLink {
    std::size_t orig_creg = 0;
    std::size_t orig_bit = 0;
    std::size_t sub_creg = 0;
    std::size_t sub_bit = 0;
    bool operator==(const BitLink&) const = default;
};

struct Subcircuit {
    Circuit circuit;
    /// qubit_map[i] is the original index of subcircuit qubit i.
    std::vector<std::size_t> qubit_map;
    /// Original creg bits owned (written) by this subcircuit.
    std::vector<BitLink> bits;
};

/// Splits a circuit into independent subcircuits, one per interaction
/// component. Components that measure into the same classical bit are merged
/// first so every written bit has exactly one owner. Bits that are never
/// written belong to no subcircuit (they always read 0) unless only one
/// subcircuit exists, in which case the circuit is returned unchanged.
inline std::vector<Subcircuit> split_circuit(const Circuit& c)
{
    const auto off = clbit_offsets(c);
    detail::DisjointSets ds(c.num_qubits);
    detail::couple_qubits(c, ds);
    {
        std::vector<std::optional<std::size_t>> writer(off.back());
        for (const auto& ins : c.instructions)
            if (const auto* m = std::get_if<Measure>(&ins)) {
                auto& w = writer[off[*c.creg_index(m->bit.creg)] + m->bit.index];
                if (w)
                    ds.unite(*w, m->qubit);
                else
                    w = m->qubit;
            }
    }
    const auto groups = ds.groups();

    if (groups.size() <= 1) {
        Subcircuit whole{c, {}, {}};
        whole.qubit_map.resize(c.num_qubits);
        std::iota(whole.qubit_map.begin(), whole.qubit_map.end(), 0);
        for (std::size_t r = 0; r < c.cregs.size(); ++r)
            for (std::size_t b = 0; b < c.cregs[r].size; ++b)
                whole.bits.push_back({r, b, r, b});
        return {std::move(whole)};
    }

    std::vector<std::size_t> group_of(c.num_qubits);
    std::vector<std::size_t> local_index(c.num_qubits);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t k = 0; k < groups[g].size(); ++k) {
            group_of[groups[g][k]] = g;
            local_index[groups[g][k]] = k;
        }

    std::vector<Subcircuit> out;
    out.reserve(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        Subcircuit sub;
        sub.circuit.num_qubits = groups[g].size();
        sub.qubit_map = groups[g];

        // Which original cregs this group conditions on, and which bits it writes.
        std::vector<bool> conditioned(c.cregs.size(), false);
        std::vector<std::vector<bool>> written(c.cregs.size());
        for (std::size_t r = 0; r < c.cregs.size(); ++r)
            written[r].assign(c.cregs[r].size, false);
        for (const auto& ins : c.instructions) {
            if (const auto* m = std::get_if<Measure>(&ins)) {
                if (group_of[m->qubit] == g)
                    written[*c.creg_index(m->bit.creg)][m->bit.index] = true;
                continue;
            }
            const auto* cond = detail::condition_of(ins);
            if (!cond || !*cond)
                continue;
            const std::size_t q = std::holds_alternative<Gate>(ins) ? std::get<Gate>(ins).qubits[0]
                                                                    : std::get<Reset>(ins).qubit;
            if (group_of[q] == g)
                conditioned[*c.creg_index((*cond)->creg)] = true;
        }

        // bit_remap[r][b] = local bit index, creg_remap[r] = local creg index
        std::vector<std::optional<std::size_t>> creg_remap(c.cregs.size());
        std::vector<std::vector<std::size_t>> bit_remap(c.cregs.size());
        for (std::size_t r = 0; r < c.cregs.size(); ++r) {
            const std::size_t n_written =
                static_cast<std::size_t>(std::count(written[r].begin(), written[r].end(), true));
            if (!conditioned[r] && n_written == 0)
                continue;
            creg_remap[r] = sub.circuit.cregs.size();
            bit_remap[r].assign(c.cregs[r].size, SIZE_MAX);
            if (conditioned[r]) {
                sub.circuit.cregs.push_back(c.cregs[r]);
                for (std::size_t b = 0; b < c.cregs[r].size; ++b)
                    bit_remap[r][b] = b;
            } else {
                sub.circuit.cregs.push_back({c.cregs[r].name, n_written});
                std::size_t next = 0;
                for (std::size_t b = 0; b < c.cregs[r].size; ++b)
                    if (written[r][b])
                        bit_remap[r][b] = next++;
            }
            for (std::size_t b = 0; b < c.cregs[r].size; ++b)
                if (written[r][b])
                    sub.bits.push_back({r, b, *creg_remap[r], bit_remap[r][b]});
        }

        for (const auto& ins : c.instructions) {
            if (const auto* gate = std::get_if<Gate>(&ins)) {
                if (group_of[gate->qubits[0]] != g)
                    continue;
                Gate copy = *gate;
                for (auto& q : copy.qubits)
                    q = local_index[q];
                sub.circuit.instructions.emplace_back(std::move(copy));
            } else if (const auto* m = std::get_if<Measure>(&ins)) {
                if (group_of[m->qubit] != g)
                    continue;
                const std::size_t r = *c.creg_index(m->bit.creg);
                sub.circuit.instructions.emplace_back(Measure{local_index[m->qubit], {m->bit.creg, bit_remap[r][m->bit.index]}});
            } else if (const auto* rs = std::get_if<Reset>(&ins)) {
                if (group_of[rs->qubit] != g)
                    continue;
                sub.circuit.instructions.emplace_back(Reset{local_index[rs->qubit], rs->condition});
            } else {
                Barrier b;
                for (auto q : std::get<Barrier>(ins).qubits)
                    if (group_of[q] == g)
                        b.qubits.push_back(local_index[q]);
                if (!b.qubits.empty())
                    sub.circuit.instructions.emplace_back(std::move(b));
            }
        }
        out.push_back(std::move(sub));
    }
    return out;
}

} // namespace qfw
