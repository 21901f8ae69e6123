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
#include <atomic>
#include <bit>
#include <exception>
#include <future>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qfw/circuit.hpp"
#include "qfw/error.hpp"
#include "qfw/qasm.hpp"
#include "qfw/qpm.hpp"
#include "qfw/rng.hpp"
#include "qfw/statevec.hpp"

/// Quantum Task Manager: turns programs into tasks, routes them to a
/// backend, cuts separable circuits into independent subtasks on the way
/// down and recombines their results on the way back up.
namespace qfw::qtm {

using qpm::BackendKind;

struct Preferences {
    std::optional<BackendKind> backend_kind;
    std::optional<std::string> backend_id;
    std::optional<std::size_t> workers;
    bool allow_cutting = true;
};

struct QuantumTask {
    std::string task_id;
    Circuit circuit;
    std::uint64_t shots = 1;
    std::uint64_t seed = 0;
    Preferences preferences;
    std::string origin_job_id;
};

struct RoutingConfig {
    std::size_t sv_max = 24;
    std::size_t tn_depth_max = 1000;
    /// Qubits one worker holds locally before gang mode kicks in.
    std::size_t local_qubits = 20;
    std::size_t gang_limit = 64;
};

struct CutPlan {
    std::vector<Subcircuit> subtasks;
    std::vector<std::uint64_t> seeds;
    std::vector<ClassicalRegister> original_cregs;
    std::uint64_t shots = 1;
    std::uint64_t seed = 0;
};

struct RoutingDecision {
    std::string backend_id;
    BackendKind kind = BackendKind::state_vector;
    std::size_t workers = 1;
    /// Present only when the task is split into more than one subtask.
    std::optional<CutPlan> cut;
};

enum class ExecMode { serial, parallel };

// ---------------------------------------------------------------------------

class TaskManager {
public:
    QuantumTask normalize(std::string_view qasm_text, std::uint64_t shots, std::uint64_t seed, Preferences prefs = {},
                          std::string origin_job_id = {})
    {
        return normalize(qasm::parse_qasm(qasm_text), shots, seed, std::move(prefs), std::move(origin_job_id));
    }

    QuantumTask normalize(Circuit circuit, std::uint64_t shots, std::uint64_t seed, Preferences prefs = {},
                          std::string origin_job_id = {})
    {
        validate(circuit);
        if (shots == 0)
            throw Error(Errc::validation_error, "task shots must be positive");
        return {"task-" + std::to_string(++next_id_), std::move(circuit), shots, seed, std::move(prefs),
                std::move(origin_job_id)};
    }

private:
    std::atomic<std::uint64_t> next_id_{0};
};

inline CutPlan cut(const QuantumTask& task)
{
    CutPlan plan;
    plan.subtasks = split_circuit(task.circuit);
    plan.original_cregs = task.circuit.cregs;
    plan.shots = task.shots;
    plan.seed = task.seed;
    // A single subtask keeps the task seed so uncuttable tasks behave exactly
    // like uncut ones.
    for (std::size_t i = 0; i < plan.subtasks.size(); ++i)
        plan.seeds.push_back(plan.subtasks.size() == 1 ? task.seed : derive_seed(task.seed, {stream::subtask, i}));
    return plan;
}

namespace detail {

inline bool fits(const qpm::BackendDescriptor& d, const Circuit& c)
{
    try {
        qpm::check_fits(d, c);
        return true;
    } catch (const Error&) {
        return false;
    }
}

inline std::size_t default_workers(std::size_t n, const RoutingConfig& cfg)
{
    const std::size_t excess = n > cfg.local_qubits ? n - cfg.local_qubits : 0;
    const std::size_t limit = std::max<std::size_t>(cfg.gang_limit, 1);
    const std::size_t raw = excess >= 63 ? limit : std::min<std::size_t>(limit, std::size_t{1} << excess);
    return std::bit_floor(raw);
}

} // namespace detail

/// Preferences first, then qubit-count/depth heuristics:
/// n <= sv_max -> state vector; else tensor network if depth <= tn_depth_max;
/// otherwise no feasible backend. Hardware is only reachable by preference.
inline RoutingDecision route(const QuantumTask& task, const qpm::Registry& registry, const RoutingConfig& cfg)
{
    const auto backends = registry.list_backends();
    if (backends.empty())
        throw Error(Errc::no_feasible_backend, "no backends registered");
    const Circuit& c = task.circuit;
    const std::size_t n = c.num_qubits;
    const auto& pref = task.preferences;

    const qpm::BackendDescriptor* chosen = nullptr;
    if (pref.backend_id || pref.backend_kind) {
        if (pref.backend_id) {
            for (const auto& d : backends)
                if (d.id == *pref.backend_id)
                    chosen = &d;
            if (!chosen)
                throw Error(Errc::incompatible_preference, "preferred backend '" + *pref.backend_id + "' is not registered");
            if (pref.backend_kind && chosen->kind != *pref.backend_kind)
                throw Error(Errc::incompatible_preference, "preferred backend '" + chosen->id + "' is not of kind " +
                                                               std::string(qpm::kind_name(*pref.backend_kind)));
        } else {
            bool any_of_kind = false;
            for (const auto& d : backends)
                if (d.kind == *pref.backend_kind) {
                    any_of_kind = true;
                    if (d.max_qubits >= n) {
                        chosen = &d;
                        break;
                    }
                }
            if (!any_of_kind)
                throw Error(Errc::incompatible_preference,
                            "no backend of preferred kind " + std::string(qpm::kind_name(*pref.backend_kind)));
            if (!chosen)
                throw Error(Errc::incompatible_preference, "no backend of the preferred kind holds " +
                                                               std::to_string(n) + " qubits");
        }
        if (n > chosen->max_qubits)
            throw Error(Errc::incompatible_preference, "preferred backend '" + chosen->id + "' holds at most " +
                                                           std::to_string(chosen->max_qubits) + " qubits");
        // Mid-circuit incompatibility surfaces with its specific code.
        qpm::check_fits(*chosen, c);
    } else {
        if (n <= cfg.sv_max)
            for (const auto& d : backends)
                if (d.kind == BackendKind::state_vector && detail::fits(d, c)) {
                    chosen = &d;
                    break;
                }
        if (!chosen && depth(c) <= cfg.tn_depth_max)
            for (const auto& d : backends)
                if (d.kind == BackendKind::tensor_network && detail::fits(d, c)) {
                    chosen = &d;
                    break;
                }
        if (!chosen)
            throw Error(Errc::no_feasible_backend, "no backend can run a " + std::to_string(n) + "-qubit circuit of depth " +
                                                       std::to_string(depth(c)));
    }

    RoutingDecision dec;
    dec.backend_id = chosen->id;
    dec.kind = chosen->kind;
    const std::size_t max_w = n >= 63 ? SIZE_MAX : (std::size_t{1} << std::max<std::size_t>(n, 0));
    if (pref.workers) {
        const std::size_t w = *pref.workers;
        if (w == 0 || !std::has_single_bit(w) || w > max_w)
            throw Error(Errc::incompatible_preference,
                        "worker preference " + std::to_string(w) + " must be a power of two no larger than 2^n");
        if (chosen->kind == BackendKind::hardware && w != 1)
            throw Error(Errc::incompatible_preference, "hardware backends run with one worker");
        dec.workers = w;
    } else {
        dec.workers = chosen->kind == BackendKind::hardware ? 1 : std::min(detail::default_workers(n, cfg), max_w);
    }

    if (pref.allow_cutting && qpm::is_simulator(chosen->kind) && interaction_components(c).size() > 1) {
        auto plan = cut(task);
        if (plan.subtasks.size() > 1)
            dec.cut = std::move(plan);
    }
    return dec;
}

namespace detail {

inline void scatter_bits(const Subcircuit& sub, std::span<const std::uint64_t> sub_values, std::vector<std::uint64_t>& orig)
{
    for (const auto& link : sub.bits) {
        const std::uint64_t bit = (sub_values[link.sub_creg] >> link.sub_bit) & 1U;
        const std::uint64_t mask = std::uint64_t{1} << link.orig_bit;
        orig[link.orig_creg] = bit ? (orig[link.orig_creg] | mask) : (orig[link.orig_creg] & ~mask);
    }
}

} // namespace detail

/// Recombines subtask Counts shot by shot. Each subtask's shots are expanded
/// in sorted-key order and permuted with a seeded shuffle; merged shot i
/// takes shot i of every subtask.
inline sv::Counts aggregate(const CutPlan& plan, std::span<const sv::Counts> results)
{
    if (results.size() != plan.subtasks.size())
        throw Error(Errc::validation_error, "expected " + std::to_string(plan.subtasks.size()) + " subtask results, got " +
                                                std::to_string(results.size()));
    if (results.empty())
        return {{}, plan.shots};
    const std::uint64_t shots = results[0].shots;
    for (const auto& r : results) {
        std::uint64_t total = 0;
        for (const auto& [k, v] : r.table)
            total += v;
        if (r.shots != shots || total != shots)
            throw Error(Errc::shot_mismatch, "subtask results disagree on shot count");
    }

    // Per subtask: distinct decoded outcomes and the shuffled shot order.
    std::vector<std::vector<std::vector<std::uint64_t>>> decoded(results.size());
    std::vector<std::vector<std::uint32_t>> order(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& cregs = plan.subtasks[i].circuit.cregs;
        order[i].reserve(shots);
        for (const auto& [key, k] : results[i].table) {
            decoded[i].push_back(sv::parse_bits(cregs, key));
            order[i].insert(order[i].end(), k, static_cast<std::uint32_t>(decoded[i].size() - 1));
        }
        Rng rng(derive_seed(plan.seed, {stream::shuffle, i}));
        seeded_shuffle(order[i], rng);
    }

    sv::Counts out;
    out.shots = shots;
    std::vector<std::uint64_t> values(plan.original_cregs.size());
    for (std::uint64_t s = 0; s < shots; ++s) {
        std::fill(values.begin(), values.end(), 0);
        for (std::size_t i = 0; i < results.size(); ++i)
            detail::scatter_bits(plan.subtasks[i], decoded[i][order[i][s]], values);
        ++out.table[sv::format_bits(plan.original_cregs, values)];
    }
    return out;
}

/// Product of independent subtask distributions over the original layout.
inline sv::Distribution aggregate_exact(const CutPlan& plan, std::span<const sv::Distribution> parts)
{
    if (parts.size() != plan.subtasks.size())
        throw Error(Errc::validation_error, "subtask distribution count mismatch");
    std::map<std::vector<std::uint64_t>, double> joint{{std::vector<std::uint64_t>(plan.original_cregs.size(), 0), 1.0}};
    for (std::size_t i = 0; i < parts.size(); ++i) {
        std::map<std::vector<std::uint64_t>, double> next;
        for (const auto& [partial, p] : joint)
            for (const auto& [key, q] : parts[i]) {
                auto values = partial;
                detail::scatter_bits(plan.subtasks[i], sv::parse_bits(plan.subtasks[i].circuit.cregs, key), values);
                next[values] += p * q;
            }
        joint = std::move(next);
    }
    sv::Distribution out;
    for (const auto& [values, p] : joint)
        out[sv::format_bits(plan.original_cregs, values)] += p;
    return out;
}

/// Runs a task under an existing routing decision. Cut subtasks run serially
/// or concurrently; service time is their sum or max accordingly.
inline qpm::ExecuteResult execute_decision(const QuantumTask& task, const RoutingDecision& dec,
                                           const qpm::Registry& registry, ExecMode mode = ExecMode::serial,
                                           double submitted_at = 0.0)
{
    auto backend = registry.get(dec.backend_id);
    if (!dec.cut) {
        qpm::ExecuteRequest req{task.task_id, task.circuit, task.shots, task.seed, dec.workers, submitted_at};
        auto r = backend->execute(req);
        r.trace.seed = task.seed;
        return r;
    }

    const CutPlan& plan = *dec.cut;
    std::vector<qpm::ExecuteRequest> reqs;
    for (std::size_t i = 0; i < plan.subtasks.size(); ++i) {
        const auto& sub = plan.subtasks[i].circuit;
        const std::size_t w_cap = std::size_t{1} << std::max<std::size_t>(sub.num_qubits, 1);
        reqs.push_back({task.task_id + "/" + std::to_string(i), sub, task.shots, plan.seeds[i],
                        std::min(dec.workers, w_cap), submitted_at});
    }

    std::vector<std::optional<qpm::ExecuteResult>> results(reqs.size());
    std::vector<std::exception_ptr> errors(reqs.size());
    auto run_one = [&](std::size_t i) {
        try {
            results[i] = backend->execute(reqs[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (mode == ExecMode::parallel) {
        std::vector<std::future<void>> futs;
        for (std::size_t i = 0; i < reqs.size(); ++i)
            futs.push_back(std::async(std::launch::async, run_one, i));
        for (auto& f : futs)
            f.get();
    } else {
        for (std::size_t i = 0; i < reqs.size(); ++i)
            run_one(i);
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    qpm::ExecuteResult out;
    out.task_id = task.task_id;
    out.backend_id = dec.backend_id;
    out.trace.seed = task.seed;
    std::vector<sv::Counts> counts;
    for (auto& r : results) {
        out.trace += r->trace;
        out.queue_wait = std::max(out.queue_wait, r->queue_wait);
        out.modeled_service_time = mode == ExecMode::parallel
                                       ? std::max(out.modeled_service_time, r->modeled_service_time)
                                       : out.modeled_service_time + r->modeled_service_time;
        counts.push_back(std::move(r->counts));
    }
    out.counts = aggregate(plan, counts);
    return out;
}

inline qpm::ExecuteResult execute_task(const QuantumTask& task, const qpm::Registry& registry, const RoutingConfig& cfg,
                                       ExecMode mode = ExecMode::serial, double submitted_at = 0.0)
{
    return execute_decision(task, route(task, registry, cfg), registry, mode, submitted_at);
}

} // namespace qfw::qtm
