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

// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Tolerances and time budgets are fixed here.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "oracle.hpp"
#include "qfw/qfw.hpp"

using namespace qfw;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void check(bool ok, const std::string& why)
    {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

constexpr double prob_tol = 1e-10;
constexpr double amp_tol = 1e-12;
constexpr double tv_tol = 0.03;

double max_gap(const std::map<std::string, double>& a, const std::map<std::string, double>& b)
{
    double gap = 0;
    for (const auto& [k, p] : a) {
        auto it = b.find(k);
        gap = std::max(gap, std::abs(p - (it == b.end() ? 0.0 : it->second)));
    }
    for (const auto& [k, p] : b)
        if (!a.count(k))
            gap = std::max(gap, std::abs(p));
    return gap;
}

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1e", v);
    return buf;
}

std::map<std::string, double> as_map(const sv::Distribution& d) { return {d.begin(), d.end()}; }

// 1
Outcome simulator_vs_oracle()
{
    Outcome o;
    std::mt19937_64 rng(1001);
    double worst = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng() % 4, layers = 1 + rng() % 3;
        Circuit c = oracle::random_circuit(rng, n, layers * n * 2, true);
        if (t % 4 == 0 && n >= 2) {
            // mid-circuit measurement feeding a conditional, then re-measure
            Circuit d(n);
            d.add_creg("m", 1);
            for (const auto& ins : c.instructions)
                if (std::holds_alternative<Gate>(ins))
                    d.instructions.push_back(ins);
            d.measure(0, "m", 0).add_if("m", 1, GateKind::x, {1});
            d.add_creg("c", n);
            for (std::size_t q = 0; q < n; ++q)
                d.measure(q, "c", q);
            c = d;
        }
        const double gap = max_gap(as_map(sv::exact_distribution(c)), oracle::distribution(c));
        worst = std::max(worst, gap);
        o.check(gap <= prob_tol, "circuit " + std::to_string(t) + " differs by " + std::to_string(gap));

        Circuit pure(n);
        for (const auto& ins : c.instructions)
            if (const auto* g = std::get_if<Gate>(&ins); g && !g->condition)
                pure.instructions.push_back(ins);
        sv::State s = sv::new_state(n, 1);
        for (const auto& ins : pure.instructions)
            sv::apply_instruction(s, ins);
        const auto ref = oracle::final_state(pure);
        for (std::size_t i = 0; i < ref.size(); ++i)
            o.check(std::abs(s.amplitude(i) - ref[i]) <= prob_tol, "amplitude mismatch in circuit " + std::to_string(t));
    }
    if (o.pass)
        o.detail = "200 circuits, max |dp| = " + sci(worst);
    return o;
}

// 2
Outcome worker_independence()
{
    Outcome o;
    std::mt19937_64 rng(2002);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 3 + rng() % 8;
        Circuit c = oracle::random_circuit(rng, n, 3 * n, false);
        c.add_creg("c", n);
        if (t % 2) {
            c.add_creg("f", 1);
            c.measure(n - 1, "f", 0).add_if("f", 1, GateKind::h, {0});
        }
        for (std::size_t q = 0; q < n; ++q)
            c.measure(q, "c", q);
        const std::uint64_t seed = rng();
        const auto base = sv::run(c, 1000, seed, 1);
        for (std::size_t w : {2u, 4u}) {
            const auto r = sv::run(c, 1000, seed, w);
            o.check(r.counts == base.counts, "counts differ at w=" + std::to_string(w) + " circuit " + std::to_string(t));
            const auto a = base.final_state.amplitudes(), b = r.final_state.amplitudes();
            for (std::size_t i = 0; i < a.size(); ++i)
                o.check(std::abs(a[i] - b[i]) <= amp_tol, "amplitudes differ at w=" + std::to_string(w));
        }
    }
    if (o.pass)
        o.detail = "50 circuits x w in {1,2,4}";
    return o;
}

// 3
Outcome cut_exactness()
{
    Outcome o;
    std::mt19937_64 rng(3003);
    qtm::TaskManager tm;
    double worst = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t blocks = 2 + rng() % 3;
        const Circuit c = oracle::product_circuit(rng, blocks);
        const auto plan = qtm::cut(tm.normalize(c, 1, t));
        o.check(plan.subtasks.size() == blocks, "expected " + std::to_string(blocks) + " components");
        std::vector<sv::Distribution> parts;
        for (const auto& s : plan.subtasks)
            parts.push_back(sv::exact_distribution(s.circuit));
        const double gap = max_gap(as_map(qtm::aggregate_exact(plan, parts)), as_map(sv::exact_distribution(c)));
        worst = std::max(worst, gap);
        o.check(gap <= prob_tol, "cut distribution differs by " + std::to_string(gap));
    }
    qpm::Registry reg;
    reg.register_backend(std::make_shared<qpm::StateVectorBackend>());
    double worst_tv = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Circuit c = oracle::product_circuit(rng, 2);
        const auto task = tm.normalize(c, 10000, seed);
        const auto dec = qtm::route(task, reg, {});
        o.check(dec.cut.has_value(), "product circuit was not cut");
        const auto r = qtm::execute_decision(task, dec, reg);
        const double tv = oracle::tv_distance(r.counts.table, 10000, oracle::distribution(c));
        worst_tv = std::max(worst_tv, tv);
        o.check(tv <= tv_tol, "TV " + std::to_string(tv) + " at seed " + std::to_string(seed));
    }
    if (o.pass)
        o.detail = "max |dp| = " + sci(worst) + ", max TV = " + sci(worst_tv);
    return o;
}

// 4
Outcome ghz_and_teleport()
{
    Outcome o;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto g = sv::run(workloads::ghz_circuit(3), 10000, seed, 1).counts;
        o.check(g.table.size() == 2 && g.table.count("000") && g.table.count("111"), "GHZ produced other keys");
        for (const char* k : {"000", "111"})
            o.check(g[k] >= 4700 && g[k] <= 5300, std::string("GHZ ") + k + " = " + std::to_string(g[k]));
        const auto pi_run = sv::run(workloads::teleport_circuit(std::numbers::pi), 10000, seed, 1).counts;
        o.check(workloads::last_bit_one_frequency(pi_run) == 1.0, "teleport(pi) P(1) != 1");
        const double half = workloads::last_bit_one_frequency(
            sv::run(workloads::teleport_circuit(std::numbers::pi / 2), 10000, seed, 1).counts);
        o.check(half >= 0.48 && half <= 0.52, "teleport(pi/2) P(1) = " + std::to_string(half));
    }
    if (o.pass)
        o.detail = "10 seeds";
    return o;
}

// 5
Outcome hardware_noise()
{
    Outcome o;
    Circuit bell(2);
    bell.add_creg("c", 2);
    bell.add(GateKind::h, {0}).add(GateKind::cx, {0, 1}).measure(0, "c", 0).measure(1, "c", 1);
    qpm::MockHardwareConfig noisy;
    noisy.readout_p = 0.1;
    qpm::MockHardwareBackend dev(noisy);
    const auto r = dev.execute({"bell", bell, 10000, 5, 1, 0});
    const double odd = r.counts.frequency("01") + r.counts.frequency("10");
    o.check(odd >= 0.16 && odd <= 0.20, "P(01)+P(10) = " + std::to_string(odd));
    qpm::MockHardwareConfig clean;
    clean.readout_p = 0.0;
    qpm::MockHardwareBackend ideal(clean);
    qpm::StateVectorBackend svb;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const qpm::ExecuteRequest req{"bell", bell, 10000, seed, 1, 0};
        o.check(ideal.execute(req).counts == svb.execute(req).counts, "p=0 differs from statevec");
    }
    if (o.pass)
        o.detail = "P(01)+P(10) = " + std::to_string(odd);
    return o;
}

// 6
Outcome scheduler_invariants()
{
    Outcome o;
    constexpr std::size_t N = 32;
    std::mt19937_64 rng(6006);
    resman::ClusterConfig cfg;
    cfg.total_nodes = N;
    cfg.backfill = true;
    cfg.audit = true;
    resman::Cluster cl(cfg);
    double t = 0;
    for (int j = 0; j < 1000; ++j) {
        t += static_cast<double>(rng() % 4);
        resman::JobSpec s;
        s.job_id = "j" + std::to_string(j);
        s.submit_time = t;
        s.model = rng() % 2 ? resman::Model::per_job : resman::Model::single_qc;
        s.app_nodes = 1 + rng() % 8;
        s.sim_nodes = s.model == resman::Model::per_job ? 1 + rng() % (N - s.app_nodes) : 0;
        const auto steps = 1 + rng() % 3;
        for (std::size_t k = 0; k < steps; ++k) {
            std::vector<resman::QuantumWork> work;
            for (std::size_t q = 0, m = 1 + rng() % 4; q < m; ++q) {
                resman::QuantumWork w{s.job_id + "-" + std::to_string(k) + "-" + std::to_string(q),
                                      s.model == resman::Model::per_job ? qpm::BackendKind::state_vector
                                                                         : qpm::BackendKind::hardware,
                                      1, 0.5 + static_cast<double>(rng() % 20)};
                if (s.model == resman::Model::per_job)
                    w.workers = 1 + rng() % (s.sim_nodes + (rng() % 50 == 0 ? 2 : 0)); // occasional overflow
                work.push_back(w);
            }
            s.workload.steps.push_back(resman::Step::quantum(work));
            s.workload.steps.push_back(resman::Step::classical(static_cast<double>(rng() % 10)));
        }
        cl.submit_job(s);
    }
    try {
        cl.run();
    } catch (const Error& e) {
        o.check(false, e.what());
        return o;
    }

    // Replay the event log with no access to cluster internals.
    std::map<std::string, std::size_t> need;
    std::map<std::string, std::vector<std::size_t>> held;
    std::map<std::string, int> state; // 0 queued, 1 running, 2 done
    std::vector<int> owner(N, 0);
    std::size_t submitted = 0, queued = 0, running = 0, done = 0;
    double last_request = -1;
    auto nodes_of = [](const std::string& list) {
        std::vector<std::size_t> out;
        std::stringstream ss(list);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty())
                out.push_back(std::stoul(tok));
        return out;
    };
    for (const auto& r : cl.log()) {
        switch (r.kind) {
        case resman::EventKind::submit: {
            std::size_t a = 0, s = 0;
            std::sscanf(r.detail.c_str(), "a=%zu s=%zu", &a, &s);
            need[r.job_id] = a + s;
            state[r.job_id] = 0;
            ++submitted;
            ++queued;
            break;
        }
        case resman::EventKind::grant: {
            o.check(state[r.job_id] == 0, "grant for a job that is not queued");
            const auto sp = r.detail.find(" sim=");
            auto nodes = nodes_of(r.detail.substr(4, sp - 4));
            const auto sim = nodes_of(r.detail.substr(sp + 5));
            nodes.insert(nodes.end(), sim.begin(), sim.end());
            o.check(nodes.size() == need[r.job_id], "partial allocation for " + r.job_id);
            for (auto n : nodes) {
                o.check(n < N && owner[n] == 0, "node " + std::to_string(n) + " double-booked at " + std::to_string(r.time));
                if (n < N)
                    ++owner[n];
            }
            held[r.job_id] = nodes;
            state[r.job_id] = 1;
            --queued;
            ++running;
            break;
        }
        case resman::EventKind::complete:
        case resman::EventKind::fail:
            o.check(state[r.job_id] == 1, "job ended without running");
            for (auto n : held[r.job_id])
                --owner[n];
            held.erase(r.job_id);
            state[r.job_id] = 2;
            --running;
            ++done;
            break;
        case resman::EventKind::device_acquire: {
            double wait = 0;
            const auto w = r.detail.find("wait=");
            if (w != std::string::npos)
                wait = std::stod(r.detail.substr(w + 5));
            const double requested = r.time - wait;
            o.check(requested >= last_request - 1e-6, "device granted out of request order at " + std::to_string(r.time));
            last_request = std::max(last_request, requested);
            break;
        }
        case resman::EventKind::device_release: break;
        }
        o.check(submitted == queued + running + done, "job conservation broken");
    }
    o.check(submitted == 1000 && done == 1000, "not every job finished");
    if (o.pass)
        o.detail = std::to_string(cl.log().size()) + " events replayed, " + std::to_string(cl.counters().failed) +
                   " jobs failed by design";
    return o;
}

// 7
Outcome model_comparison()
{
    Outcome o;
    const workloads::System sys(default_config());
    std::string waits;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        workloads::ScenarioSpec s;
        s.pattern = workloads::Pattern::ensemble;
        s.k = 8;
        s.shots = 500;
        s.seed = seed;
        const auto per = workloads::run_scenario(sys, s);
        s.model = resman::Model::single_qc;
        const auto single = workloads::run_scenario(sys, s);
        o.check(per.ok() && single.ok(), "scenario failed: " + per.error + single.error);
        o.check(per.mean_queue_wait < single.mean_queue_wait,
                "seed " + std::to_string(seed) + ": " + std::to_string(per.mean_queue_wait) +
                    " >= " + std::to_string(single.mean_queue_wait));
        if (seed == 1)
            waits = std::to_string(per.mean_queue_wait) + " vs " + std::to_string(single.mean_queue_wait);
    }
    if (o.pass)
        o.detail = "5 seeds, seed 1 mean wait " + waits + " s";
    return o;
}

// 8
Outcome routing_contract()
{
    Outcome o;
    qpm::Registry full, sv_only;
    full.register_backend(std::make_shared<qpm::StateVectorBackend>());
    full.register_backend(std::make_shared<qpm::TensorNetworkBackend>("tn", 60));
    full.register_backend(std::make_shared<qpm::MockHardwareBackend>());
    sv_only.register_backend(std::make_shared<qpm::StateVectorBackend>());
    qtm::TaskManager tm;
    auto chain = [](std::size_t n, std::size_t layers) {
        Circuit c(n);
        for (std::size_t l = 0; l < layers; ++l)
            for (std::size_t q = 0; q + 1 < n; ++q)
                c.add(GateKind::cx, {q, q + 1});
        return c;
    };
    auto code = [&](const qtm::QuantumTask& t, const qpm::Registry& r, const qtm::RoutingConfig& cfg) {
        try {
            qtm::route(t, r, cfg);
        } catch (const Error& e) {
            return std::string(errc_name(e.code()));
        }
        return std::string("ok");
    };
    qtm::RoutingConfig cfg;
    cfg.gang_limit = 1024;
    cfg.tn_depth_max = depth(chain(30, 4));
    struct Row {
        std::size_t n, layers;
        const qpm::Registry* reg;
        std::string backend;
        std::size_t workers;
    };
    const std::vector<Row> rows{{5, 1, &full, "statevec", 1},   {20, 1, &full, "statevec", 1},
                                {21, 1, &full, "statevec", 2},  {22, 1, &full, "statevec", 4},
                                {24, 1, &full, "statevec", 16}, {25, 1, &full, "tn", 32},
                                {30, 4, &full, "tn", 1024},     {25, 1, &sv_only, "NoFeasibleBackend", 0},
                                {30, 5, &full, "NoFeasibleBackend", 0}};
    for (const auto& r : rows) {
        const auto task = tm.normalize(chain(r.n, r.layers), 1, 1);
        if (r.workers == 0) {
            o.check(code(task, *r.reg, cfg) == r.backend, "n=" + std::to_string(r.n) + " expected " + r.backend);
            continue;
        }
        const auto d = qtm::route(task, *r.reg, cfg);
        o.check(d.backend_id == r.backend && d.workers == r.workers,
                "n=" + std::to_string(r.n) + " routed to " + d.backend_id + " w=" + std::to_string(d.workers));
    }
    for (std::size_t L : {0u, 3u, 20u})
        for (std::size_t n = 1; n <= 24; ++n) {
            qtm::RoutingConfig c2;
            c2.local_qubits = L;
            c2.gang_limit = std::size_t{1} << 24;
            const auto d = qtm::route(tm.normalize(chain(n, 1), 1, 1), full, c2);
            o.check(d.workers == (std::size_t{1} << (n > L ? n - L : 0)), "w rule fails at n=" + std::to_string(n));
        }
    for (const char* id : {"statevec", "tn", "mock-hw"}) {
        qtm::Preferences p;
        p.backend_id = id;
        o.check(qtm::route(tm.normalize(chain(3, 1), 1, 1, p), full, cfg).backend_id == id,
                std::string("preference for ") + id + " ignored");
    }
    qtm::Preferences w2;
    w2.workers = 2;
    o.check(qtm::route(tm.normalize(chain(3, 1), 1, 1, w2), full, cfg).workers == 2, "worker preference ignored");
    qtm::Preferences missing;
    missing.backend_id = "absent";
    o.check(code(tm.normalize(chain(3, 1), 1, 1, missing), full, cfg) == "IncompatiblePreference",
            "unknown backend preference accepted");
    o.check(code(tm.normalize(chain(3, 1), 1, 1), qpm::Registry{}, cfg) == "NoFeasibleBackend", "empty registry routed");
    if (o.pass)
        o.detail = std::to_string(rows.size()) + " table rows, w rule over 72 cases, preferences";
    return o;
}

// 9
Outcome parser_corpus()
{
    Outcome o;
    const fs::path root = fs::path(QFW_SOURCE_DIR) / "tests" / "corpus";
    std::size_t valid = 0, invalid = 0;
    for (const auto& e : fs::directory_iterator(root / "valid")) {
        try {
            const Circuit c = qasm::parse_qasm(read_file(e.path().string()));
            o.check(qasm::parse_qasm(qasm::serialize_qasm(c)) == c, "round trip differs: " + e.path().filename().string());
        } catch (const Error& err) {
            o.check(false, e.path().filename().string() + ": " + err.what());
        }
        ++valid;
    }
    std::ifstream tsv(root / "invalid" / "expected.tsv");
    std::string line;
    while (std::getline(tsv, line)) {
        std::istringstream ss(line);
        std::string file, code;
        std::size_t l = 0, col = 0;
        ss >> file >> code >> l >> col;
        try {
            qasm::parse_qasm(read_file((root / "invalid" / file).string()));
            o.check(false, file + " parsed");
        } catch (const Error& err) {
            o.check(errc_name(err.code()) == code && err.position() && err.position()->line == l &&
                        err.position()->column == col,
                    file + ": got " + err.what());
        }
        ++invalid;
    }
    o.check(valid + invalid >= 30, "corpus has only " + std::to_string(valid + invalid) + " files");
    if (o.pass)
        o.detail = std::to_string(valid) + " valid round-trip, " + std::to_string(invalid) + " invalid positioned";
    return o;
}

// 10
Outcome end_to_end_determinism()
{
    Outcome o;
    const workloads::System sys(default_config());
    for (auto p : {workloads::Pattern::single_circuit, workloads::Pattern::ensemble, workloads::Pattern::in_sequence}) {
        workloads::ScenarioSpec s;
        s.pattern = p;
        s.seed = 10;
        const auto a = workloads::render_report(workloads::run_scenario(sys, s));
        const auto b = workloads::render_report(workloads::run_scenario(sys, s));
        o.check(a == b, std::string(workloads::pattern_name(p)) + " reports differ in-process");
    }
#ifdef QFW_CLI_PATH
    const fs::path tmp = fs::temp_directory_path() / ("qfw_acceptance_" + std::to_string(std::random_device{}()));
    for (const char* p : {"single_circuit", "ensemble", "in_sequence"}) {
        std::string reports[2];
        for (int i = 0; i < 2; ++i) {
            const fs::path out = tmp / (std::string(p) + std::to_string(i));
            const std::string cmd = std::string(QFW_CLI_PATH) + " scenario " + p + " --seed 10 --no-timestamp --out " +
                                    out.string() + " > /dev/null";
            o.check(std::system(cmd.c_str()) == 0, std::string("CLI scenario ") + p + " failed");
            try {
                reports[i] = read_file((out / "report.jsonl").string()) + read_file((out / "events.tsv").string());
            } catch (const Error& e) {
                o.check(false, e.what());
            }
        }
        o.check(!reports[0].empty() && reports[0] == reports[1], std::string("CLI reports differ for ") + p);
    }
    fs::remove_all(tmp);
    if (o.pass)
        o.detail = "3 patterns, in-process and two CLI invocations";
#else
    if (o.pass)
        o.detail = "3 patterns, in-process";
#endif
    return o;
}

} // namespace

int main()
{
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double budget_s;
    };
    const std::vector<Criterion> criteria{
        {"simulator matches dense oracle", simulator_vs_oracle, 10},
        {"worker-count independence", worker_independence, 30},
        {"cut/aggregate exactness", cut_exactness, 0},
        {"GHZ and teleportation analytics", ghz_and_teleport, 0},
        {"mock hardware readout noise", hardware_noise, 0},
        {"scheduler invariants (1000 jobs)", scheduler_invariants, 20},
        {"per-job vs single-QC queue wait", model_comparison, 0},
        {"routing contract", routing_contract, 0},
        {"parser corpus", parser_corpus, 0},
        {"end-to-end determinism", end_to_end_determinism, 0},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (criteria[i].budget_s > 0 && secs > criteria[i].budget_s) {
            o.pass = false;
            o.detail = "took " + std::to_string(secs) + " s, budget " + std::to_string(criteria[i].budget_s) + " s";
        }
        failed += !o.pass;
        std::printf("%s %2zu %-34s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
