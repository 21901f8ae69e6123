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
#include <cmath>
#include <exception>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "qfw/circuit.hpp"
#include "qfw/error.hpp"
#include "qfw/qpm.hpp"
#include "qfw/qtm.hpp"
#include "qfw/statevec.hpp"

/// The dynamic simulation environment: a job's simulation nodes split into
/// per-simulator-kind partitions, a planner that packs routed tasks onto them
/// (gang for w > 1, throughput for w == 1, FIFO per kind), and an executor
/// that runs the plan through the platform manager.
namespace qfw::simenv {

using qpm::BackendKind;

struct PartitionSpec {
    BackendKind kind = BackendKind::state_vector;
    std::size_t nodes = 0;
    bool operator==(const PartitionSpec&) const = default;
};

enum class PlanSource { user_config, default_plan };

struct SimPartitionPlan {
    std::vector<PartitionSpec> partitions;
    PlanSource source = PlanSource::default_plan;
    std::size_t sim_nodes = 0;

    std::size_t nodes_of(BackendKind k) const
    {
        for (const auto& p : partitions)
            if (p.kind == k)
                return p.nodes;
        return 0;
    }
    /// Partitions occupy consecutive node ids in declaration order.
    std::size_t first_node(BackendKind k) const
    {
        std::size_t off = 0;
        for (const auto& p : partitions) {
            if (p.kind == k)
                return off;
            off += p.nodes;
        }
        return off;
    }
};

inline SimPartitionPlan configure(std::size_t sim_nodes, const std::optional<std::vector<PartitionSpec>>& user = std::nullopt)
{
    SimPartitionPlan plan;
    plan.sim_nodes = sim_nodes;
    if (!user) {
        plan.partitions = {{BackendKind::state_vector, sim_nodes}};
        return plan;
    }
    plan.source = PlanSource::user_config;
    std::size_t total = 0;
    std::set<BackendKind> seen;
    for (const auto& p : *user) {
        if (!qpm::is_simulator(p.kind))
            throw Error(Errc::config_error, "simulation partitions hold simulator kinds only");
        if (!seen.insert(p.kind).second)
            throw Error(Errc::config_error, "partition kind listed twice");
        total += p.nodes;
    }
    if (total > sim_nodes)
        throw Error(Errc::oversubscribed, "partition plan asks for " + std::to_string(total) + " nodes, only " +
                                              std::to_string(sim_nodes) + " available");
    plan.partitions = *user;
    return plan;
}

enum class RunMode { gang, throughput };

struct WorkItem {
    std::string task_id;
    BackendKind kind = BackendKind::state_vector;
    std::size_t workers = 1;
    double duration = 0.0;
};

struct Assignment {
    std::string task_id;
    BackendKind kind = BackendKind::state_vector;
    std::vector<std::size_t> nodes;
    RunMode mode = RunMode::throughput;
    std::size_t workers = 1;
    double start = 0.0;
    double end = 0.0;
};

struct TaskFailure {
    std::string task_id;
    Errc code;
    std::string message;
};

struct ExecutionPlan {
    std::vector<Assignment> assignments;
    std::vector<TaskFailure> failures;
    double makespan = 0.0;

    const Assignment* find(const std::string& task_id) const
    {
        for (const auto& a : assignments)
            if (a.task_id == task_id)
                return &a;
        return nullptr;
    }
};

/// Discrete-event list scheduling, one FIFO per kind partition. The queue
/// head starts as soon as `workers` nodes of its partition are free (lowest
/// ids first); a blocked head blocks its kind. Tasks wider than their
/// partition fail with WorkersExceedPartition.
inline ExecutionPlan schedule(std::span<const WorkItem> items, const SimPartitionPlan& plan, double start_time = 0.0)
{
    ExecutionPlan out;
    out.makespan = 0.0;
    std::map<BackendKind, std::vector<std::size_t>> queues;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        const std::size_t cap = plan.nodes_of(it.kind);
        if (it.workers == 0 || it.workers > cap) {
            out.failures.push_back({it.task_id, Errc::workers_exceed_partition,
                                    "task needs " + std::to_string(it.workers) + " " +
                                        std::string(qpm::kind_name(it.kind)) + " nodes, partition has " +
                                        std::to_string(cap)});
            continue;
        }
        queues[it.kind].push_back(i);
    }

    std::vector<std::pair<std::size_t, Assignment>> started;
    for (auto& [kind, queue] : queues) {
        const std::size_t first = plan.first_node(kind);
        std::set<std::size_t> free;
        for (std::size_t k = 0; k < plan.nodes_of(kind); ++k)
            free.insert(first + k);
        std::multimap<double, std::vector<std::size_t>> running; // end time -> nodes
        double now = start_time;
        std::size_t head = 0;
        while (head < queue.size()) {
            while (head < queue.size() && items[queue[head]].workers <= free.size()) {
                const WorkItem& it = items[queue[head]];
                Assignment a{it.task_id, kind, {}, it.workers > 1 ? RunMode::gang : RunMode::throughput, it.workers,
                             now, now + it.duration};
                for (std::size_t k = 0; k < it.workers; ++k) {
                    a.nodes.push_back(*free.begin());
                    free.erase(free.begin());
                }
                running.emplace(a.end, a.nodes);
                started.emplace_back(queue[head], std::move(a));
                ++head;
            }
            if (head == queue.size())
                break;
            // Advance to the next completion and release everything ending then.
            now = running.begin()->first;
            while (!running.empty() && running.begin()->first <= now) {
                for (auto n : running.begin()->second)
                    free.insert(n);
                running.erase(running.begin());
            }
        }
    }
    std::stable_sort(started.begin(), started.end(), [](const auto& a, const auto& b) {
        return a.second.start != b.second.start ? a.second.start < b.second.start : a.first < b.first;
    });
    for (auto& [idx, a] : started) {
        out.makespan = std::max(out.makespan, a.end - start_time);
        out.assignments.push_back(std::move(a));
    }
    return out;
}

struct TimingModel {
    double alpha = 1e-3;
    double beta = 1e-9;
    double gamma = 1e-9;

    /// alpha + beta * gates * 2^n / w + gamma * exchange_cost(c, n, w)
    double service_time(const Circuit& c, std::size_t workers) const
    {
        const std::size_t n = std::max<std::size_t>(c.num_qubits, 1);
        return alpha +
               beta * static_cast<double>(gate_count(c)) * std::ldexp(1.0, static_cast<int>(n)) /
                   static_cast<double>(workers) +
               gamma * static_cast<double>(sv::exchange_cost(c, n, workers));
    }
};

struct RoutedTask {
    qtm::QuantumTask task;
    qtm::RoutingDecision decision;
};

/// Modeled time of a routed task at `workers`; cut subtasks run one after
/// another inside the assignment.
inline double task_time(const RoutedTask& rt, std::size_t workers, const TimingModel& timing)
{
    if (!rt.decision.cut)
        return timing.service_time(rt.task.circuit, workers);
    double total = 0.0;
    for (const auto& sub : rt.decision.cut->subtasks) {
        const std::size_t cap = std::size_t{1} << std::max<std::size_t>(sub.circuit.num_qubits, 1);
        total += timing.service_time(sub.circuit, std::min(workers, cap));
    }
    return total;
}

inline ExecutionPlan assess(std::span<const RoutedTask> queue, const SimPartitionPlan& plan, const TimingModel& timing)
{
    std::vector<WorkItem> items;
    items.reserve(queue.size());
    for (const auto& rt : queue) {
        if (!qpm::is_simulator(rt.decision.kind))
            items.push_back({rt.task.task_id, rt.decision.kind, rt.decision.workers, 0.0});
        else
            items.push_back({rt.task.task_id, rt.decision.kind, rt.decision.workers,
                             task_time(rt, rt.decision.workers, timing)});
    }
    return schedule(items, plan);
}

struct EnvMetrics {
    double makespan = 0.0;
    double utilization = 0.0;
    std::size_t nodes = 0;
};

struct PlanOutcome {
    /// Queue order; failed tasks are absent here and listed in failures.
    std::vector<qpm::ExecuteResult> results;
    std::vector<TaskFailure> failures;
    EnvMetrics metrics;
};

/// Runs every assignment through the platform manager with its worker
/// count. Results carry the plan's timeline: queue_wait is the assignment
/// start and modeled_service_time its duration. A failing task does not
/// abort its siblings.
inline PlanOutcome execute_plan(const ExecutionPlan& plan, std::span<const RoutedTask> queue,
                                const qpm::Registry& registry, const SimPartitionPlan& partitions, bool concurrent = true)
{
    PlanOutcome out;
    out.failures = plan.failures;
    std::vector<std::optional<qpm::ExecuteResult>> results(queue.size());
    std::vector<std::optional<TaskFailure>> errors(queue.size());
    std::vector<const Assignment*> assigned(queue.size(), nullptr);
    for (std::size_t i = 0; i < queue.size(); ++i)
        assigned[i] = plan.find(queue[i].task.task_id);

    auto run_one = [&](std::size_t i) {
        const Assignment& a = *assigned[i];
        auto dec = queue[i].decision;
        dec.workers = a.workers;
        try {
            auto r = qtm::execute_decision(queue[i].task, dec, registry, qtm::ExecMode::serial, a.start);
            r.queue_wait = a.start;
            r.modeled_service_time = a.end - a.start;
            results[i] = std::move(r);
        } catch (const Error& e) {
            errors[i] = TaskFailure{queue[i].task.task_id, e.code(), e.what()};
        }
    };
    if (concurrent) {
        std::vector<std::future<void>> futs;
        for (std::size_t i = 0; i < queue.size(); ++i)
            if (assigned[i])
                futs.push_back(std::async(std::launch::async, run_one, i));
        for (auto& f : futs)
            f.get();
    } else {
        for (std::size_t i = 0; i < queue.size(); ++i)
            if (assigned[i])
                run_one(i);
    }

    double busy = 0.0;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        if (results[i]) {
            out.results.push_back(std::move(*results[i]));
            busy += static_cast<double>(assigned[i]->workers) * (assigned[i]->end - assigned[i]->start);
        } else if (errors[i]) {
            out.failures.push_back(std::move(*errors[i]));
        }
    }
    out.metrics.makespan = plan.makespan;
    out.metrics.nodes = partitions.sim_nodes;
    if (plan.makespan > 0.0 && partitions.sim_nodes > 0)
        out.metrics.utilization = busy / (static_cast<double>(partitions.sim_nodes) * plan.makespan);
    return out;
}

} // namespace qfw::simenv
