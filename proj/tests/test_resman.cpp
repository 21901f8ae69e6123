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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "qfw/resman.hpp"

using namespace qfw;
using namespace qfw::resman;
using qpm::BackendKind;

namespace {

template <class F>
Errc code_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::io_error;
}

JobSpec classical_job(std::string id, std::size_t a, std::size_t s, double seconds, double at = 0.0)
{
    JobSpec j;
    j.job_id = std::move(id);
    j.app_nodes = a;
    j.sim_nodes = s;
    j.submit_time = at;
    j.workload.steps = {Step::classical(seconds)};
    return j;
}

JobSpec manual_qc(std::string id)
{
    JobSpec j;
    j.job_id = std::move(id);
    j.model = Model::single_qc;
    j.workload.manual = true;
    return j;
}

JobSpec quantum_job(std::string id, Model model, std::size_t tasks, double dur, double at = 0.0)
{
    JobSpec j;
    j.job_id = id;
    j.model = model;
    j.sim_nodes = model == Model::per_job ? tasks : 0;
    j.submit_time = at;
    std::vector<QuantumWork> work;
    for (std::size_t t = 0; t < tasks; ++t)
        work.push_back({id + "-t" + std::to_string(t),
                        model == Model::per_job ? BackendKind::state_vector : BackendKind::hardware, 1, dur});
    j.workload.steps = {Step::quantum(work), Step::classical(0.5)};
    return j;
}

double wait_of(const Metrics& m, const std::string& id)
{
    for (const auto& j : m.jobs)
        if (j.job_id == id)
            return j.wait;
    ADD_FAILURE() << "no job " << id;
    return -1;
}

std::vector<std::size_t> parse_nodes(const std::string& s)
{
    std::vector<std::size_t> out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ','))
        if (!tok.empty())
            out.push_back(std::stoul(tok));
    return out;
}

} // namespace

TEST(SubmitJob, Validation)
{
    Cluster c({8});
    EXPECT_EQ(code_of([&] { c.submit_job(classical_job("", 1, 1, 1)); }), Errc::invalid_spec);
    EXPECT_EQ(code_of([&] { c.submit_job(classical_job("a", 0, 1, 1)); }), Errc::invalid_spec);
    EXPECT_EQ(code_of([&] { c.submit_job(classical_job("a", 1, 0, 1)); }), Errc::invalid_spec);
    EXPECT_EQ(code_of([&] { c.submit_job(classical_job("a", 4, 5, 1)); }), Errc::invalid_spec);
    EXPECT_EQ(code_of([&] { c.submit_job(classical_job("a", 1, 1, -1)); }), Errc::invalid_spec);
    auto qc = manual_qc("q");
    qc.sim_nodes = 2;
    EXPECT_EQ(code_of([&] { c.submit_job(qc); }), Errc::invalid_spec);
    auto hw = quantum_job("h", Model::per_job, 1, 1);
    hw.workload.steps[0].tasks[0].kind = BackendKind::hardware;
    EXPECT_EQ(code_of([&] { c.submit_job(hw); }), Errc::invalid_spec);
    c.submit_job(classical_job("a", 1, 1, 1));
    EXPECT_EQ(code_of([&] { c.submit_job(classical_job("a", 1, 1, 1)); }), Errc::invalid_spec);
    ClusterConfig no_dev{8};
    no_dev.single_qc_device.reset();
    Cluster d(no_dev);
    EXPECT_EQ(code_of([&] { d.submit_job(manual_qc("q")); }), Errc::invalid_spec);
}

TEST(SubmitJob, GrantedImmediatelyWhenFree)
{
    Cluster c({8});
    c.submit_job(classical_job("a", 2, 4, 10));
    c.tick();
    EXPECT_EQ(c.state("a"), JobState::running);
    const auto* al = c.allocation("a");
    ASSERT_NE(al, nullptr);
    EXPECT_EQ(al->app_nodes, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(al->sim_nodes, (std::vector<std::size_t>{2, 3, 4, 5}));
    EXPECT_EQ(c.free_nodes(), 2u);
    c.run();
    EXPECT_EQ(c.state("a"), JobState::completed);
    EXPECT_EQ(c.now(), 10.0);
}

TEST(SubmitJob, FifoBlocksSecondJob)
{
    Cluster c({8});
    c.submit_job(classical_job("A", 2, 4, 100));
    c.submit_job(classical_job("B", 2, 4, 5, 1.0));
    c.run();
    const auto m = c.metrics();
    EXPECT_DOUBLE_EQ(wait_of(m, "A"), 0.0);
    EXPECT_DOUBLE_EQ(wait_of(m, "B"), 99.0);
    EXPECT_DOUBLE_EQ(m.horizon, 105.0);
}

TEST(Backfill, SmallJobFillsTheGap)
{
    for (bool backfill : {false, true}) {
        ClusterConfig cfg{8};
        cfg.backfill = backfill;
        cfg.audit = true;
        Cluster c(cfg);
        c.submit_job(classical_job("A", 2, 4, 100));
        c.submit_job(classical_job("B", 2, 4, 5, 1.0));
        c.submit_job(classical_job("C", 1, 1, 10, 2.0));
        c.run();
        const auto m = c.metrics();
        EXPECT_DOUBLE_EQ(wait_of(m, "B"), 99.0);
        EXPECT_DOUBLE_EQ(wait_of(m, "C"), backfill ? 0.0 : 98.0);
    }
}

TEST(Backfill, NeverDelaysTheHead)
{
    ClusterConfig cfg{8};
    cfg.backfill = true;
    Cluster c(cfg);
    c.submit_job(classical_job("A", 2, 4, 100));
    c.submit_job(classical_job("B", 2, 6, 5, 1.0)); // needs the whole machine
    c.submit_job(classical_job("C", 1, 1, 500, 2.0)); // would outlast A
    c.run();
    const auto m = c.metrics();
    EXPECT_DOUBLE_EQ(wait_of(m, "B"), 99.0);
    EXPECT_DOUBLE_EQ(wait_of(m, "C"), 103.0);
}

TEST(Device, AcquireQueueRelease)
{
    Cluster c({8});
    c.submit_job(manual_qc("x"));
    c.submit_job(manual_qc("y"));
    c.tick();
    const auto t1 = c.acquire_device("x");
    EXPECT_TRUE(t1.granted);
    const auto t2 = c.acquire_device("y");
    EXPECT_FALSE(t2.granted);
    EXPECT_EQ(t2.position, 1u);
    EXPECT_EQ(c.device_holder(), "x");
    EXPECT_EQ(code_of([&] { c.release_device("y"); }), Errc::not_held);
    c.release_device("x");
    EXPECT_EQ(c.device_holder(), "y");
    c.release("y");
    EXPECT_FALSE(c.device_holder());
    EXPECT_EQ(c.state("y"), JobState::completed);
    EXPECT_EQ(code_of([&] { c.release("y"); }), Errc::not_held);
    EXPECT_EQ(code_of([&] { c.release("nobody"); }), Errc::invalid_spec);
    c.check_invariants();
}

TEST(Device, PerJobHasNoDevice)
{
    Cluster c({8});
    auto j = classical_job("p", 1, 1, 10);
    j.workload.manual = true;
    c.submit_job(j);
    c.tick();
    EXPECT_EQ(code_of([&] { c.acquire_device("p"); }), Errc::no_device);
}

TEST(Metrics, Utilization)
{
    Cluster c({4});
    c.submit_job(classical_job("a", 1, 2, 10));
    c.run();
    EXPECT_DOUBLE_EQ(c.metrics().utilization, 0.75);
}

TEST(Metrics, PerJobVersusSingleQcWaits)
{
    Cluster per({16}), single({16});
    for (int j = 0; j < 2; ++j) {
        per.submit_job(quantum_job("p" + std::to_string(j), Model::per_job, 4, 1.0));
        single.submit_job(quantum_job("s" + std::to_string(j), Model::single_qc, 4, 1.0));
    }
    per.run();
    single.run();
    const auto mp = per.metrics(), ms = single.metrics();
    EXPECT_DOUBLE_EQ(mp.mean_task_queue_wait, 0.0);
    // 8 device requests at t=0, served one at a time: waits 0..7
    EXPECT_DOUBLE_EQ(ms.mean_task_queue_wait, 3.5);
    ASSERT_EQ(ms.device_queue_waits.size(), 8u);
    EXPECT_LT(mp.jobs[0].turnaround, ms.jobs[0].turnaround);
}

TEST(Failure, WorkersExceedPartitionFailsJob)
{
    Cluster c({8});
    auto j = quantum_job("w", Model::per_job, 2, 1.0);
    j.workload.steps[0].tasks[0].workers = 4;
    c.submit_job(j);
    c.run();
    EXPECT_EQ(c.state("w"), JobState::failed);
    EXPECT_EQ(c.log().back().kind, EventKind::fail);
    EXPECT_EQ(c.log().back().detail.rfind("WorkersExceedPartition", 0), 0u);
    EXPECT_EQ(c.free_nodes(), 8u);
}

TEST(EventLog, ExportIsTabSeparated)
{
    Cluster c({4});
    c.submit_job(classical_job("a", 1, 1, 2));
    c.run();
    const std::string log = c.export_log();
    EXPECT_NE(log.find("\tgrant\ta\tapp=0 sim=1\n"), std::string::npos) << log;
    EXPECT_NE(log.find("\tcomplete\ta\t"), std::string::npos);
}

TEST(EventLog, EventCapEnforced)
{
    ClusterConfig cfg{4};
    cfg.max_events = 3;
    Cluster c(cfg);
    for (int i = 0; i < 5; ++i)
        c.submit_job(classical_job("j" + std::to_string(i), 1, 1, 1));
    EXPECT_EQ(code_of([&] { c.run(); }), Errc::event_cap_exceeded);
}

class RandomWorkloads : public ::testing::TestWithParam<bool> {};

TEST_P(RandomWorkloads, InvariantsHoldAndLogReplays)
{
    std::mt19937_64 rng(GetParam() ? 21 : 22);
    for (int round = 0; round < 20; ++round) {
        ClusterConfig cfg{12};
        cfg.backfill = GetParam();
        cfg.audit = true;
        Cluster c(cfg);
        double t = 0;
        for (int j = 0; j < 40; ++j) {
            t += static_cast<double>(rng() % 5);
            const Model model = rng() % 2 ? Model::per_job : Model::single_qc;
            JobSpec s = quantum_job("j" + std::to_string(j), model, 1 + rng() % 4, 0.5 + (rng() % 10), t);
            s.app_nodes = 1 + rng() % 3;
            if (rng() % 3 == 0)
                s.workload.steps.push_back(Step::classical(static_cast<double>(rng() % 7)));
            c.submit_job(s);
        }
        c.run();
        c.check_invariants();
        const auto& cn = c.counters();
        EXPECT_EQ(cn.submitted, 40u);
        EXPECT_EQ(cn.completed + cn.failed, 40u);
        EXPECT_EQ(cn.running + cn.queued, 0u);
        EXPECT_EQ(c.free_nodes(), 12u);

        // Independent replay: node ownership from grant/complete/fail records.
        std::map<std::string, std::vector<std::size_t>> held;
        std::vector<int> owner(12, 0);
        for (const auto& r : c.log()) {
            if (r.kind == EventKind::grant) {
                const auto sp = r.detail.find(" sim=");
                auto nodes = parse_nodes(r.detail.substr(4, sp - 4));
                const auto sim = parse_nodes(r.detail.substr(sp + 5));
                nodes.insert(nodes.end(), sim.begin(), sim.end());
                for (auto n : nodes)
                    EXPECT_EQ(owner[n]++, 0) << "node " << n << " at " << r.time;
                held[r.job_id] = nodes;
            } else if (r.kind == EventKind::complete || r.kind == EventKind::fail) {
                for (auto n : held[r.job_id])
                    --owner[n];
            }
        }
        for (auto o : owner)
            EXPECT_EQ(o, 0);
    }
}

INSTANTIATE_TEST_SUITE_P(Backfill, RandomWorkloads, ::testing::Values(false, true));
