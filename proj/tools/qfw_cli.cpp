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

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qfw/qfw.hpp"

namespace {

using namespace qfw;

std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct JobFlags {
    std::string model = "per_job";
    std::size_t app_nodes = 1;
    std::size_t sim_nodes = 4;
    std::optional<std::string> backend;
    std::optional<std::size_t> workers;
    std::string out;
    bool timestamp = true;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--model", model, "Integration model: per_job or single_qc")
            ->check(CLI::IsMember({"per_job", "single_qc"}));
        cmd->add_option("--app-nodes", app_nodes, "Application nodes")->check(CLI::PositiveNumber);
        cmd->add_option("--sim-nodes", sim_nodes, "Simulation nodes (per_job)");
        cmd->add_option("--backend", backend, "Backend id preference");
        cmd->add_option("--workers", workers, "Worker count preference")->check(CLI::PositiveNumber);
        cmd->add_option("--out", out, "Run directory");
        cmd->add_flag("!--no-timestamp", timestamp, "Omit created_at from the report");
    }

    void apply(workloads::ScenarioSpec& s) const
    {
        s.model = resman::model_from_name(model);
        s.app_nodes = app_nodes;
        s.sim_nodes = sim_nodes;
        s.preferences.backend_id = backend;
        s.preferences.workers = workers;
    }
};

int finish(const workloads::RunReport& r, const JobFlags& f, const std::string& default_dir)
{
    const std::filesystem::path dir = f.out.empty() ? std::filesystem::path("runs") / default_dir : std::filesystem::path(f.out);
    workloads::write_run_dir(dir, r, f.timestamp ? std::optional<std::string>(utc_now()) : std::nullopt);
    std::cout << workloads::summarize_report(workloads::render_report(r));
    std::cout << "run directory " << dir.string() << "\n";
    if (!r.ok()) {
        std::cerr << "error: " << r.error_code << ": " << r.error << "\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid quantum/classical orchestration on a simulated HPC cluster"};
    app.require_subcommand(1);
    std::optional<std::string> config_path;
    app.add_option("--config", config_path, std::string("Configuration file (default: $") + config_env_var + ")");

    auto* submit = app.add_subcommand("submit", "Run one OpenQASM 2.0 file as a job");
    std::string qasm_file;
    std::uint64_t submit_shots = 1000, submit_seed = 1;
    JobFlags submit_flags;
    submit->add_option("file", qasm_file, "OpenQASM 2.0 file")->required();
    submit->add_option("--shots", submit_shots, "Shots")->check(CLI::PositiveNumber);
    submit->add_option("--seed", submit_seed, "Seed");
    submit_flags.attach(submit);

    auto* scenario = app.add_subcommand("scenario", "Run a usage-pattern scenario");
    std::string pattern;
    workloads::ScenarioSpec spec;
    JobFlags scenario_flags;
    bool same_seed = false;
    scenario->add_option("pattern", pattern, "in_sequence, single_circuit or ensemble")
        ->required()
        ->check(CLI::IsMember({"in_sequence", "single_circuit", "ensemble"}));
    scenario->add_option("--n", spec.n, "Qubits (single_circuit, ensemble)");
    scenario->add_option("--shots", spec.shots, "Shots per task")->check(CLI::PositiveNumber);
    scenario->add_option("--seed", spec.seed, "Seed");
    scenario->add_option("--k", spec.k, "Ensemble size")->check(CLI::PositiveNumber);
    scenario->add_option("--layers", spec.layers, "Random layers per ensemble circuit");
    scenario->add_option("--theta", spec.theta, "Starting angle (in_sequence)");
    scenario->add_option("--iteration-cap", spec.iteration_cap, "Bisection iteration cap")->check(CLI::PositiveNumber);
    scenario->add_option("--tolerance", spec.tolerance, "Target tolerance on P(1)");
    scenario->add_flag("--same-seed", same_seed, "Give every ensemble circuit the base seed");
    scenario_flags.attach(scenario);

    auto* backends = app.add_subcommand("backends", "Backend registry");
    backends->require_subcommand(1);
    auto* backends_list = backends->add_subcommand("list", "List registered backends");

    auto* report = app.add_subcommand("report", "Re-render the metrics of a run directory");
    std::string run_dir;
    report->add_option("run-dir", run_dir, "Run directory")->required();

    auto* workflow = app.add_subcommand("workflow", "Run a linear hybrid workflow file");
    std::string workflow_file;
    JobFlags workflow_flags;
    workflow->add_option("file", workflow_file, "Workflow JSON file")->required();
    workflow_flags.attach(workflow);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (report->parsed()) {
            std::cout << workloads::summarize_report(read_file((std::filesystem::path(run_dir) / "report.jsonl").string()));
            return 0;
        }
        const workloads::System sys(resolve_config(config_path));
        if (backends_list->parsed()) {
            for (const auto& d : sys.registry().list_backends())
                std::cout << d.id << "\t" << qpm::kind_name(d.kind) << "\tmax_qubits=" << d.max_qubits
                          << "\tmid_circuit=" << (d.supports_mid_circuit ? "yes" : "no")
                          << "\tconcurrency=" << d.concurrency << "\n";
            return 0;
        }
        if (submit->parsed()) {
            workloads::ScenarioSpec s;
            s.shots = submit_shots;
            s.seed = submit_seed;
            submit_flags.apply(s);
            const Circuit c = qasm::parse_qasm(read_file(qasm_file));
            const auto r = workloads::run_submit(sys, c, s);
            return finish(r, submit_flags,
                          std::filesystem::path(qasm_file).stem().string() + "-seed" + std::to_string(s.seed));
        }
        if (scenario->parsed()) {
            spec.pattern = workloads::pattern_from_name(pattern);
            spec.vary_seed = !same_seed;
            scenario_flags.apply(spec);
            const auto r = workloads::run_scenario(sys, spec);
            return finish(r, scenario_flags, pattern + "-seed" + std::to_string(spec.seed));
        }
        if (workflow->parsed()) {
            const auto wf = workloads::load_workflow(workflow_file);
            const auto r = workloads::run_workflow(sys, wf, resman::model_from_name(workflow_flags.model),
                                                   workflow_flags.app_nodes, workflow_flags.sim_nodes);
            return finish(r, workflow_flags, wf.name + "-seed" + std::to_string(wf.seed));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
