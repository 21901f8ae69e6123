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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qfw/circuit.hpp"
#include "qfw/config.hpp"
#include "qfw/error.hpp"
#include "qfw/qasm.hpp"
#include "qfw/qpm.hpp"
#include "qfw/qtm.hpp"
#include "qfw/resman.hpp"
#include "qfw/rng.hpp"
#include "qfw/simenv.hpp"
#include "qfw/statevec.hpp"

/// Usage-pattern scenario drivers, the linear hybrid workflow runner and the
/// run report they produce.
namespace qfw::workloads {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scenario circuits
// ---------------------------------------------------------------------------

/// h on qubit 0, cx chain, every qubit measured into c[n].
inline Circuit ghz_circuit(std::size_t n)
{
    Circuit c(n);
    c.add_creg("c", n);
    c.add(GateKind::h, {0});
    for (std::size_t q = 1; q < n; ++q)
        c.add(GateKind::cx, {q - 1, q});
    for (std::size_t q = 0; q < n; ++q)
        c.measure(q, "c", q);
    return c;
}

/// Teleports ry(theta)|0> from qubit 0 to qubit 2 with mid-circuit
/// measurement and conditioned corrections. Keys read "m0 m1 out".
inline Circuit teleport_circuit(double theta)
{
    Circuit c(3);
    c.add_creg("m0", 1).add_creg("m1", 1).add_creg("out", 1);
    c.add(GateKind::ry, {0}, {theta});
    c.add(GateKind::h, {1});
    c.add(GateKind::cx, {1, 2});
    c.add(GateKind::cx, {0, 1});
    c.add(GateKind::h, {0});
    c.measure(0, "m0", 0);
    c.measure(1, "m1", 0);
    c.add_if("m1", 1, GateKind::x, {2});
    c.add_if("m0", 1, GateKind::z, {2});
    c.measure(2, "out", 0);
    return c;
}

/// Each layer: u(theta, phi, lambda) on every qubit with angles uniform in
/// [0, 2pi), then cx on a random disjoint pairing. Ends by measuring all
/// qubits into c[n].
inline Circuit random_layered_circuit(std::size_t n, std::size_t layers, std::uint64_t seed)
{
    Rng rng(seed);
    Circuit c(n);
    c.add_creg("c", n);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<std::size_t> perm(n);
    for (std::size_t l = 0; l < layers; ++l) {
        for (std::size_t q = 0; q < n; ++q) {
            const double th = two_pi * rng.uniform();
            const double ph = two_pi * rng.uniform();
            const double la = two_pi * rng.uniform();
            c.add(GateKind::u, {q}, {th, ph, la});
        }
        for (std::size_t q = 0; q < n; ++q)
            perm[q] = q;
        seeded_shuffle(perm, rng);
        for (std::size_t k = 0; k + 1 < n; k += 2)
            c.add(GateKind::cx, {perm[k], perm[k + 1]});
    }
    for (std::size_t q = 0; q < n; ++q)
        c.measure(q, "c", q);
    return c;
}

/// Probability of the outcome whose last creg bit (rightmost character) is 1.
inline double last_bit_one_frequency(const sv::Counts& counts)
{
    std::uint64_t ones = 0;
    for (const auto& [key, k] : counts.table)
        if (!key.empty() && key.back() == '1')
            ones += k;
    return counts.shots ? static_cast<double>(ones) / static_cast<double>(counts.shots) : 0.0;
}

inline std::string zeros_key(const Circuit& c)
{
    const std::vector<std::uint64_t> zeros(c.cregs.size(), 0);
    return sv::format_bits(c.cregs, zeros);
}

/// FNV-1a over the canonical "key=count;" rendering.
inline std::string counts_digest(const sv::Counts& counts)
{
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&h](std::string_view s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& [key, k] : counts.table) {
        feed(key);
        feed("=");
        feed(std::to_string(k));
        feed(";");
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class Pattern { in_sequence, single_circuit, ensemble };

constexpr std::string_view pattern_name(Pattern p) noexcept
{
    switch (p) {
    case Pattern::in_sequence: return "in_sequence";
    case Pattern::single_circuit: return "single_circuit";
    case Pattern::ensemble: return "ensemble";
    }
    return "?";
}

inline Pattern pattern_from_name(std::string_view s)
{
    for (auto p : {Pattern::in_sequence, Pattern::single_circuit, Pattern::ensemble})
        if (pattern_name(p) == s)
            return p;
    throw Error(Errc::validation_error, "unknown scenario pattern '" + std::string(s) + "'");
}

struct ScenarioSpec {
    Pattern pattern = Pattern::single_circuit;
    std::size_t n = 3;
    std::uint64_t shots = 1000;
    std::size_t k = 4;
    std::size_t layers = 2;
    double theta = std::numbers::pi / 2;
    std::size_t iteration_cap = 30;
    double tolerance = 0.02;
    std::uint64_t seed = 1;
    /// When false every ensemble circuit uses the base seed.
    bool vary_seed = true;
    resman::Model model = resman::Model::per_job;
    std::size_t app_nodes = 1;
    std::size_t sim_nodes = 4;
    qtm::Preferences preferences;
};

/// Error text without the code prefix; the code is reported separately.
inline std::string error_message(const Error& e)
{
    if (const auto& pos = e.position())
        return std::to_string(pos->line) + ":" + std::to_string(pos->column) + ": " + e.detail();
    return e.detail();
}

struct TaskReport {
    std::string task_id;
    std::string status = "ok";
    std::string backend_id;
    std::size_t workers = 1;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    double queue_wait = 0.0;
    double service_time = 0.0;
    double start = 0.0;
    double end = 0.0;
    sv::Counts counts;
    sv::ExecutionTrace trace;
    std::string error_code;
    std::string error;
    bool ok() const { return status == "ok"; }
};

struct StageReport {
    std::string name;
    std::string kind;
    std::string placement;
    double start = 0.0;
    double end = 0.0;
    json output;
};

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string model;
    std::string status = "ok";
    std::string error_code;
    std::string error;
    std::vector<TaskReport> tasks;
    std::vector<json> iterations;
    std::vector<StageReport> stages;
    double makespan = 0.0;
    double utilization = 0.0;
    double mean_queue_wait = 0.0;
    json answer;
    json config;
    std::vector<resman::EventRecord> events;

    bool ok() const { return status == "ok"; }

    void fail(const Error& e)
    {
        if (!ok())
            return;
        status = "failed";
        error_code = std::string(errc_name(e.code()));
        error = error_message(e);
    }

    const TaskReport* find_task(const std::string& id) const
    {
        for (const auto& t : tasks)
            if (t.task_id == id)
                return &t;
        return nullptr;
    }
};

inline json counts_json(const sv::Counts& c)
{
    json j = json::object();
    for (const auto& [k, v] : c.table)
        j[k] = v;
    return j;
}

/// JSON Lines, one record per line, fixed key order. `created_at` is the
/// only field that varies between identical runs.
inline std::string render_report(const RunReport& r, const std::optional<std::string>& created_at = std::nullopt)
{
    std::string out;
    auto line = [&out](const json& j) { out += j.dump() + "\n"; };

    json head{{"record", "run"}, {"scenario", r.scenario}, {"seed", r.seed}, {"model", r.model}};
    if (created_at)
        head["created_at"] = *created_at;
    line(head);
    line(json{{"record", "config"}, {"config", r.config}});
    for (const auto& t : r.tasks) {
        json j{{"record", "task"},
               {"task_id", t.task_id},
               {"status", t.status},
               {"backend", t.backend_id},
               {"workers", t.workers},
               {"shots", t.shots},
               {"seed", t.seed},
               {"queue_wait", t.queue_wait},
               {"service_time", t.service_time},
               {"start", t.start},
               {"end", t.end},
               {"counts_digest", counts_digest(t.counts)},
               {"counts", counts_json(t.counts)},
               {"trace",
                {{"gates_applied", t.trace.gates_applied},
                 {"conditioned_applied", t.trace.conditioned_applied},
                 {"measures", t.trace.measures},
                 {"exchanged_amplitudes", t.trace.exchanged_amplitudes}}}};
        if (!t.ok())
            j["error"] = {{"code", t.error_code}, {"message", t.error}};
        line(j);
    }
    for (const auto& it : r.iterations) {
        json j{{"record", "iteration"}};
        j.update(it);
        line(j);
    }
    for (const auto& s : r.stages)
        line(json{{"record", "stage"},
                  {"name", s.name},
                  {"kind", s.kind},
                  {"placement", s.placement},
                  {"start", s.start},
                  {"end", s.end},
                  {"output", s.output}});
    json m{{"record", "metrics"},
           {"status", r.status},
           {"makespan", r.makespan},
           {"utilization", r.utilization},
           {"mean_queue_wait", r.mean_queue_wait},
           {"answer", r.answer}};
    if (!r.ok())
        m["error"] = {{"code", r.error_code}, {"message", r.error}};
    line(m);
    return out;
}

inline std::string render_events(const std::vector<resman::EventRecord>& events)
{
    std::string out;
    for (const auto& e : events)
        out += resman::format_time(e.time) + "\t" + std::string(resman::event_kind_name(e.kind)) + "\t" + e.job_id + "\t" +
               e.detail + "\n";
    return out;
}

/// Run directory layout: report.jsonl, events.tsv, config.json.
inline void write_run_dir(const std::filesystem::path& dir, const RunReport& r,
                          const std::optional<std::string>& created_at = std::nullopt)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Error(Errc::io_error, "cannot create run directory '" + dir.string() + "': " + ec.message());
    auto write = [&dir](const char* name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f)
            throw Error(Errc::io_error, "cannot write '" + (dir / name).string() + "'");
        f << text;
    };
    write("report.jsonl", render_report(r, created_at));
    write("events.tsv", render_events(r.events));
    write("config.json", r.config.dump(2) + "\n");
}

/// Human-readable summary of a report.jsonl.
inline std::string summarize_report(const std::string& jsonl)
{
    std::string out;
    std::istringstream in(jsonl);
    std::string text;
    char buf[256];
    while (std::getline(in, text)) {
        if (text.empty())
            continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw Error(Errc::validation_error, std::string("malformed report line: ") + e.what());
        }
        const auto rec = j.value("record", "");
        if (rec == "run") {
            out += "scenario " + j.value("scenario", "") + " (model " + j.value("model", "") + ", seed " +
                   std::to_string(j.value("seed", std::uint64_t{0})) + ")\n";
        } else if (rec == "task") {
            std::snprintf(buf, sizeof buf, "  task %-10s %-7s %-10s w=%-3zu wait=%12.6f service=%12.6f digest=%s\n",
                          j.value("task_id", "").c_str(), j.value("status", "").c_str(), j.value("backend", "").c_str(),
                          j.value("workers", std::size_t{0}), j.value("queue_wait", 0.0), j.value("service_time", 0.0),
                          j.value("counts_digest", "").c_str());
            out += buf;
        } else if (rec == "iteration") {
            std::snprintf(buf, sizeof buf, "  iteration %zu theta=%.6f p1=%.4f\n", j.value("index", std::size_t{0}),
                          j.value("theta", 0.0), j.value("p1", 0.0));
            out += buf;
        } else if (rec == "stage") {
            out += "  stage " + j.value("name", "") + " [" + j.value("placement", "") + "] -> " + j["output"].dump() + "\n";
        } else if (rec == "metrics") {
            std::snprintf(buf, sizeof buf, "status %s  makespan %.6f s  utilization %.4f  mean queue wait %.6f s\n",
                          j.value("status", "").c_str(), j.value("makespan", 0.0), j.value("utilization", 0.0),
                          j.value("mean_queue_wait", 0.0));
            out += buf;
            out += "answer " + j["answer"].dump() + "\n";
            if (j.contains("error"))
                out += "error " + j["error"].value("message", "") + "\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// System and job runner
// ---------------------------------------------------------------------------

class System {
public:
    explicit System(SystemConfig cfg) : cfg_(std::move(cfg))
    {
        for (const auto& b : cfg_.backends)
            registry_.register_backend(make_backend(b));
    }

    const SystemConfig& config() const noexcept { return cfg_; }
    const qpm::Registry& registry() const noexcept { return registry_; }
    qpm::Registry& registry() noexcept { return registry_; }

private:
    SystemConfig cfg_;
    qpm::Registry registry_;
};

/// Drives one hybrid job: quantum tasks execute through the task manager as
/// they are submitted (results depend only on seeds), the job's step list is
/// recorded alongside, and schedule() replays it on the simulated cluster to
/// obtain the timeline (queue waits, makespan, utilization).
class JobRunner {
public:
    JobRunner(const System& sys, RunReport& report, resman::Model model, std::size_t app_nodes, std::size_t sim_nodes)
        : sys_(sys), report_(report), model_(model), app_nodes_(app_nodes), sim_nodes_(sim_nodes)
    {
        report_.model = std::string(resman::model_name(model));
        report_.config = config_to_json(sys.config());
    }

    qtm::TaskManager& tasks() noexcept { return tasks_; }

    /// Executes the task and appends it to the current quantum batch.
    /// Returns its report entry; failures are recorded, not thrown.
    const TaskReport& submit(qtm::QuantumTask task)
    {
        TaskReport tr;
        tr.task_id = task.task_id;
        tr.shots = task.shots;
        tr.seed = task.seed;
        try {
            if (model_ == resman::Model::single_qc) {
                if (!sys_.config().cluster.single_qc_device)
                    throw Error(Errc::no_device, "cluster has no shared quantum device");
                task.preferences.backend_id = *sys_.config().cluster.single_qc_device;
                task.preferences.backend_kind.reset();
            }
            const auto dec = qtm::route(task, sys_.registry(), sys_.config().routing);
            if (model_ == resman::Model::per_job && !qpm::is_simulator(dec.kind))
                throw Error(Errc::incompatible_preference, "per-job simulation partitions cannot host hardware tasks");
            auto res = qtm::execute_decision(task, dec, sys_.registry());
            const double duration = model_ == resman::Model::per_job
                                        ? simenv::task_time({task, dec}, dec.workers, sys_.config().sim.timing)
                                        : res.modeled_service_time;
            tr.backend_id = dec.backend_id;
            tr.workers = dec.workers;
            tr.service_time = duration;
            tr.counts = std::move(res.counts);
            tr.trace = res.trace;
            batch_.push_back({task.task_id, dec.kind, dec.workers, duration});
        } catch (const Error& e) {
            tr.status = "failed";
            tr.error_code = std::string(errc_name(e.code()));
            tr.error = error_message(e);
        }
        report_.tasks.push_back(std::move(tr));
        return report_.tasks.back();
    }

    void end_batch()
    {
        if (!batch_.empty())
            steps_.push_back(resman::Step::quantum(std::move(batch_)));
        batch_.clear();
    }

    void classical_step() { steps_.push_back(resman::Step::classical(sys_.config().sim.classical_step_s)); }

    /// Replays the recorded steps as one job on a fresh cluster.
    void schedule(const std::string& job_id)
    {
        end_batch();
        resman::ClusterConfig cc = sys_.config().cluster;
        cc.audit = true;
        resman::Cluster cluster(cc);
        resman::JobSpec spec;
        spec.job_id = job_id;
        spec.app_nodes = app_nodes_;
        spec.sim_nodes = model_ == resman::Model::per_job ? sim_nodes_ : 0;
        spec.model = model_;
        spec.workload.steps = steps_;
        spec.sim_partitions = sys_.config().sim.partitions;
        try {
            cluster.submit_job(spec);
            cluster.run();
        } catch (const Error& e) {
            report_.fail(e);
            report_.events = cluster.log();
            return;
        }
        report_.events = cluster.log();
        const auto m = cluster.metrics();
        std::map<std::string, resman::TaskRecord> records;
        for (const auto& t : m.tasks)
            records[t.task_id] = t;
        std::string job_failure;
        for (const auto& e : report_.events)
            if (e.kind == resman::EventKind::fail)
                job_failure = e.detail;
        double wait_sum = 0.0;
        std::size_t waits = 0;
        for (auto& t : report_.tasks) {
            if (!t.ok())
                continue;
            auto it = records.find(t.task_id);
            if (it == records.end()) {
                t.status = "failed";
                t.error_code = "StageFailure";
                t.error = "task was not scheduled: " + job_failure;
                continue;
            }
            t.queue_wait = it->second.queue_wait();
            t.start = it->second.started_at;
            t.end = it->second.finished_at;
            wait_sum += t.queue_wait;
            ++waits;
        }
        if (!m.jobs.empty())
            report_.makespan = m.jobs.front().turnaround;
        report_.utilization = m.utilization;
        report_.mean_queue_wait = waits ? wait_sum / static_cast<double>(waits) : 0.0;
        if (!job_failure.empty())
            report_.fail(Error(Errc::stage_failure, "job failed: " + job_failure));
    }

private:
    const System& sys_;
    RunReport& report_;
    resman::Model model_;
    std::size_t app_nodes_;
    std::size_t sim_nodes_;
    qtm::TaskManager tasks_;
    std::vector<resman::QuantumWork> batch_;
    std::vector<resman::Step> steps_;
};

namespace detail {

inline void check_positive(bool ok, const char* what)
{
    if (!ok)
        throw Error(Errc::validation_error, std::string("scenario parameter ") + what + " must be positive");
}

inline void fail_on_task(RunReport& report, const TaskReport& t)
{
    if (!t.ok())
        report.fail(Error(Errc::stage_failure, "task " + t.task_id + " failed: " + t.error));
}

/// The first task error code, if any task failed.
inline void surface_task_error(RunReport& report)
{
    for (const auto& t : report.tasks)
        if (!t.ok() && report.ok()) {
            report.status = "failed";
            report.error_code = t.error_code;
            report.error = t.error;
        }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Scenario drivers
// ---------------------------------------------------------------------------

inline RunReport run_single_circuit(const System& sys, const ScenarioSpec& spec)
{
    RunReport report;
    report.scenario = std::string(pattern_name(Pattern::single_circuit));
    report.seed = spec.seed;
    JobRunner job(sys, report, spec.model, spec.app_nodes, spec.sim_nodes);
    if (spec.n < 2)
        throw Error(Errc::validation_error, "single_circuit needs n >= 2");
    detail::check_positive(spec.shots > 0, "shots");

    auto task = job.tasks().normalize(ghz_circuit(spec.n), spec.shots, spec.seed, spec.preferences, "job-1");
    const TaskReport& t = job.submit(std::move(task));
    job.schedule("job-1");
    if (t.ok())
        report.answer = {{"p_all_zeros", t.counts.frequency(std::string(spec.n, '0'))},
                         {"p_all_ones", t.counts.frequency(std::string(spec.n, '1'))}};
    detail::surface_task_error(report);
    return report;
}

inline RunReport run_ensemble(const System& sys, const ScenarioSpec& spec)
{
    RunReport report;
    report.scenario = std::string(pattern_name(Pattern::ensemble));
    report.seed = spec.seed;
    JobRunner job(sys, report, spec.model, spec.app_nodes, spec.sim_nodes);
    detail::check_positive(spec.k > 0, "k");
    detail::check_positive(spec.n > 0, "n");
    detail::check_positive(spec.shots > 0, "shots");

    std::vector<std::string> ids;
    for (std::size_t i = 0; i < spec.k; ++i) {
        const std::uint64_t s = spec.vary_seed ? derive_seed(spec.seed, {stream::scenario, i}) : spec.seed;
        auto task = job.tasks().normalize(random_layered_circuit(spec.n, spec.layers, s), spec.shots, s,
                                          spec.preferences, "job-1");
        ids.push_back(job.submit(std::move(task)).task_id);
    }
    job.end_batch();
    job.classical_step();
    job.schedule("job-1");

    json per = json::array();
    double sum = 0.0;
    std::size_t ok = 0;
    const std::string zeros(spec.n, '0');
    for (const auto& id : ids) {
        const TaskReport* t = report.find_task(id);
        if (t && t->ok()) {
            per.push_back(t->counts.frequency(zeros));
            sum += t->counts.frequency(zeros);
            ++ok;
        } else {
            per.push_back(nullptr);
        }
    }
    report.answer = {{"mean_all_zeros", ok ? sum / static_cast<double>(ok) : 0.0}, {"per_circuit", per},
                     {"failed", spec.k - ok}};
    detail::surface_task_error(report);
    return report;
}

/// Teleportation with a classical outer loop that bisects the preparation
/// angle until the measured P(out = 1) is within tolerance of 0.5.
inline RunReport run_in_sequence(const System& sys, const ScenarioSpec& spec)
{
    RunReport report;
    report.scenario = std::string(pattern_name(Pattern::in_sequence));
    report.seed = spec.seed;
    JobRunner job(sys, report, spec.model, spec.app_nodes, spec.sim_nodes);
    constexpr double pi = std::numbers::pi;
    if (!(spec.theta >= 0.0 && spec.theta < 2 * pi))
        throw Error(Errc::validation_error, "theta must lie in [0, 2pi)");
    detail::check_positive(spec.shots > 0, "shots");
    detail::check_positive(spec.iteration_cap > 0, "iteration_cap");

    std::size_t iteration = 0;
    auto measure = [&](double angle) -> std::optional<double> {
        const std::uint64_t s = derive_seed(spec.seed, {stream::scenario, iteration});
        auto task = job.tasks().normalize(teleport_circuit(angle), spec.shots, s, spec.preferences, "job-1");
        const TaskReport& t = job.submit(std::move(task));
        job.end_batch();
        job.classical_step();
        if (!t.ok()) {
            detail::fail_on_task(report, t);
            return std::nullopt;
        }
        const double p1 = last_bit_one_frequency(t.counts);
        report.iterations.push_back(json{{"index", iteration}, {"theta", angle}, {"p1", p1}, {"task_id", t.task_id}});
        ++iteration;
        return p1;
    };
    auto close = [&](double p) { return std::abs(p - 0.5) <= spec.tolerance; };

    double angle = spec.theta;
    std::optional<double> p = measure(angle);
    bool converged = p && close(*p);
    if (p && !converged) {
        // below: angle with P < 0.5, above: angle with P > 0.5
        double below, above;
        if (spec.theta <= pi) {
            below = *p < 0.5 ? spec.theta : 0.0;
            above = *p < 0.5 ? pi : spec.theta;
        } else {
            below = *p < 0.5 ? spec.theta : 2 * pi;
            above = *p < 0.5 ? pi : spec.theta;
        }
        while (iteration < spec.iteration_cap) {
            angle = 0.5 * (below + above);
            p = measure(angle);
            if (!p)
                break;
            if (close(*p)) {
                converged = true;
                break;
            }
            (*p < 0.5 ? below : above) = angle;
        }
    }
    job.schedule("job-1");
    report.answer = {{"final_theta", angle}, {"iterations", iteration}, {"converged", converged},
                     {"p1", p ? json(*p) : json(nullptr)}};
    if (p && !converged)
        report.fail(Error(Errc::non_convergence, "P(1) did not reach 0.5 +/- " + std::to_string(spec.tolerance) +
                                                     " within " + std::to_string(spec.iteration_cap) + " iterations"));
    return report;
}

/// One user circuit as a single-step job.
inline RunReport run_submit(const System& sys, const Circuit& circuit, const ScenarioSpec& spec)
{
    RunReport report;
    report.scenario = "submit";
    report.seed = spec.seed;
    JobRunner job(sys, report, spec.model, spec.app_nodes, spec.sim_nodes);
    detail::check_positive(spec.shots > 0, "shots");
    auto task = job.tasks().normalize(circuit, spec.shots, spec.seed, spec.preferences, "job-1");
    const TaskReport& t = job.submit(std::move(task));
    job.schedule("job-1");
    if (t.ok())
        report.answer = {{"task_id", t.task_id}, {"counts", counts_json(t.counts)}};
    detail::surface_task_error(report);
    return report;
}

inline RunReport run_scenario(const System& sys, const ScenarioSpec& spec)
{
    switch (spec.pattern) {
    case Pattern::single_circuit: return run_single_circuit(sys, spec);
    case Pattern::ensemble: return run_ensemble(sys, spec);
    case Pattern::in_sequence: return run_in_sequence(sys, spec);
    }
    throw Error(Errc::validation_error, "unknown pattern");
}

// ---------------------------------------------------------------------------
// Workflows
// ---------------------------------------------------------------------------

inline constexpr std::string_view builtin_ops[] = {"threshold_count", "mean_probability", "select_max"};

struct Stage {
    std::string name;
    bool quantum = true;
    // quantum
    std::string qasm_path;
    std::uint64_t shots = 0;
    std::optional<std::uint64_t> seed;
    // classical
    std::string op;
    json args = json::array();
};

struct WorkflowFile {
    std::string name = "workflow";
    std::uint64_t seed = 0;
    std::vector<Stage> stages;
};

/// Parses and validates a workflow document. Relative QASM paths resolve
/// against base_dir.
inline WorkflowFile parse_workflow(const nlohmann::json& j, const std::filesystem::path& base_dir = {})
{
    WorkflowFile wf;
    try {
        wf.name = j.value("name", std::string("workflow"));
        wf.seed = j.value("seed", std::uint64_t{0});
        if (!j.contains("stages") || !j.at("stages").is_array() || j.at("stages").empty())
            throw Error(Errc::validation_error, "workflow has no stages");
        std::set<std::string> names;
        for (const auto& s : j.at("stages")) {
            Stage st;
            st.name = s.at("name").get<std::string>();
            if (st.name.empty() || !names.insert(st.name).second)
                throw Error(Errc::validation_error, "stage names must be unique and non-empty ('" + st.name + "')");
            const auto kind = s.at("kind").get<std::string>();
            if (kind == "quantum") {
                st.quantum = true;
                std::filesystem::path p = s.at("qasm").get<std::string>();
                st.qasm_path = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
                st.shots = s.at("shots").get<std::uint64_t>();
                if (st.shots == 0)
                    throw Error(Errc::validation_error, "stage '" + st.name + "' needs positive shots");
                if (s.contains("seed"))
                    st.seed = s.at("seed").get<std::uint64_t>();
            } else if (kind == "classical") {
                st.quantum = false;
                st.op = s.at("op").get<std::string>();
                if (std::find(std::begin(builtin_ops), std::end(builtin_ops), st.op) == std::end(builtin_ops))
                    throw Error(Errc::unknown_builtin, "stage '" + st.name + "' uses unknown builtin '" + st.op + "'");
                if (s.contains("args"))
                    st.args = s.at("args");
                if (std::none_of(wf.stages.begin(), wf.stages.end(), [](const Stage& x) { return x.quantum; }))
                    throw Error(Errc::validation_error,
                                "classical stage '" + st.name + "' must follow at least one quantum stage");
            } else {
                throw Error(Errc::validation_error, "stage '" + st.name + "' has unknown kind '" + kind + "'");
            }
            wf.stages.push_back(std::move(st));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::validation_error, std::string("malformed workflow: ") + e.what());
    }
    return wf;
}

inline WorkflowFile load_workflow(const std::string& path)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::validation_error, path + ": " + e.what());
    }
    return parse_workflow(j, std::filesystem::path(path).parent_path());
}

namespace detail {

struct QuantumOutput {
    sv::Counts counts;
    std::string zeros;
};

/// Applies a builtin to the quantum outputs that immediately precede it.
inline json apply_builtin(const Stage& st, const std::vector<QuantumOutput>& group)
{
    auto arg_string = [&](std::size_t i, const std::string& fallback) {
        return st.args.size() > i ? st.args.at(i).get<std::string>() : fallback;
    };
    try {
        if (st.op == "threshold_count") {
            if (st.args.size() < 2)
                throw Error(Errc::validation_error, "threshold_count takes (bitstring, threshold)");
            const auto& last = group.back();
            return last.counts.frequency(st.args.at(0).get<std::string>()) >= st.args.at(1).get<double>();
        }
        if (st.op == "mean_probability") {
            double sum = 0.0;
            for (const auto& g : group)
                sum += g.counts.frequency(arg_string(0, g.zeros));
            return sum / static_cast<double>(group.size());
        }
        if (st.op == "select_max") {
            std::size_t best = 0;
            double best_f = -1.0;
            for (std::size_t i = 0; i < group.size(); ++i) {
                const double f = group[i].counts.frequency(arg_string(0, group[i].zeros));
                if (f > best_f) {
                    best_f = f;
                    best = i;
                }
            }
            return best;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::validation_error, "stage '" + st.name + "' arguments: " + e.what());
    }
    throw Error(Errc::unknown_builtin, "unknown builtin '" + st.op + "'");
}

} // namespace detail

/// Stages run in order. Quantum stages route through the task manager;
/// classical stages apply a builtin to the run of quantum outputs directly
/// before them.
inline RunReport run_workflow(const System& sys, const WorkflowFile& wf, resman::Model model = resman::Model::per_job,
                              std::size_t app_nodes = 1, std::size_t sim_nodes = 4)
{
    RunReport report;
    report.scenario = "workflow:" + wf.name;
    report.seed = wf.seed;
    JobRunner job(sys, report, model, app_nodes, sim_nodes);
    if (wf.stages.empty())
        throw Error(Errc::validation_error, "workflow has no stages");

    std::vector<detail::QuantumOutput> group;
    std::vector<std::optional<std::string>> stage_task(wf.stages.size());
    for (std::size_t i = 0; i < wf.stages.size() && report.ok(); ++i) {
        const Stage& st = wf.stages[i];
        StageReport sr;
        sr.name = st.name;
        sr.kind = st.quantum ? "quantum" : "classical";
        if (st.quantum) {
            if (i > 0 && !wf.stages[i - 1].quantum)
                group.clear();
            try {
                const Circuit c = qasm::parse_qasm(read_file(st.qasm_path));
                const std::uint64_t seed = st.seed ? *st.seed : derive_seed(wf.seed, {stream::scenario, i});
                auto task = job.tasks().normalize(c, st.shots, seed, {}, "job-1");
                const TaskReport& t = job.submit(std::move(task));
                job.end_batch();
                if (!t.ok())
                    throw Error(Errc::stage_failure, "stage '" + st.name + "': " + t.error);
                stage_task[i] = t.task_id;
                sr.placement = "quantum:" + t.backend_id;
                sr.output = {{"task_id", t.task_id}, {"counts", counts_json(t.counts)}};
                group.push_back({t.counts, zeros_key(c)});
            } catch (const Error& e) {
                report.fail(e.code() == Errc::stage_failure ? e : Error(Errc::stage_failure, "stage '" + st.name + "': " + e.what()));
            }
        } else {
            sr.placement = "classical";
            try {
                sr.output = detail::apply_builtin(st, group);
                job.classical_step();
            } catch (const Error& e) {
                report.fail(e.code() == Errc::unknown_builtin ? e : Error(Errc::stage_failure, "stage '" + st.name + "': " + e.what()));
            }
        }
        report.stages.push_back(std::move(sr));
    }
    job.schedule("job-1");

    // Stage timeline from the scheduled tasks; classical stages follow the
    // previous stage for one classical step.
    double cursor = 0.0;
    for (std::size_t i = 0; i < report.stages.size(); ++i) {
        auto& sr = report.stages[i];
        if (stage_task[i]) {
            if (const TaskReport* t = report.find_task(*stage_task[i]); t && t->ok()) {
                sr.start = t->start;
                sr.end = t->end;
            }
        } else {
            sr.start = cursor;
            sr.end = cursor + sys.config().sim.classical_step_s;
        }
        cursor = sr.end;
    }
    if (!report.stages.empty())
        report.answer = report.stages.back().output;
    return report;
}

} // namespace qfw::workloads
