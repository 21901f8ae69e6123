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

#include <future>
#include <random>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "qfw/qpm.hpp"

using namespace qfw;
using namespace qfw::qpm;

namespace {

Circuit bell()
{
    Circuit c(2);
    c.add_creg("c", 2);
    c.add(GateKind::h, {0}).add(GateKind::cx, {0, 1});
    c.measure(0, "c", 0).measure(1, "c", 1);
    return c;
}

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

MockHardwareConfig hw(double p)
{
    MockHardwareConfig cfg;
    cfg.readout_p = p;
    return cfg;
}

} // namespace

TEST(Registry, RegisterAndList)
{
    Registry r;
    EXPECT_TRUE(r.list_backends().empty());
    r.register_backend(std::make_shared<StateVectorBackend>());
    r.register_backend(std::make_shared<MockHardwareBackend>());
    auto list = r.list_backends();
    ASSERT_EQ(list.size(), 2u);
    EXPECT_EQ(list[0].id, "statevec");
    EXPECT_EQ(list[1].id, "mock-hw");
    EXPECT_EQ(list[1].concurrency, 1u);
    EXPECT_EQ(code_of([&] { r.register_backend(std::make_shared<StateVectorBackend>()); }), Errc::duplicate_id);
    EXPECT_EQ(r.list_backends(), list);
    r.register_backend(std::make_shared<TensorNetworkBackend>("tn", 40));
    EXPECT_EQ(r.list_backends().back().kind, BackendKind::tensor_network);
    EXPECT_EQ(r.list_backends().back().max_qubits, 40u);
}

TEST(Registry, Calibration)
{
    Registry r;
    r.register_backend(std::make_shared<StateVectorBackend>());
    r.register_backend(std::make_shared<MockHardwareBackend>(hw(0.02)));
    EXPECT_EQ(r.get_calibration("statevec").readout_flip_probability, 0.0);
    EXPECT_EQ(r.get_calibration("statevec").alpha_q, 0.0);
    EXPECT_EQ(r.get_calibration("mock-hw").readout_flip_probability, 0.02);
    EXPECT_EQ(code_of([&] { r.get_calibration("nope"); }), Errc::unknown_backend);
    EXPECT_EQ(code_of([] { MockHardwareBackend bad(hw(1.5)); }), Errc::config_error);
}

TEST(Execute, BellOnStateVector)
{
    Registry r;
    r.register_backend(std::make_shared<StateVectorBackend>());
    const auto res = r.execute("statevec", {"t", bell(), 100, 3, 1, 0});
    EXPECT_EQ(res.counts.shots, 100u);
    for (const auto& [k, v] : res.counts.table)
        EXPECT_TRUE(k == "00" || k == "11");
    EXPECT_EQ(res.backend_id, "statevec");
    EXPECT_DOUBLE_EQ(res.modeled_service_time, 1e-3 + 1e-9 * 2 * 4 / 1);
}

TEST(Execute, ReadoutNoiseMatchesBitFlipMixture)
{
    MockHardwareBackend dev(hw(0.1));
    const auto res = dev.execute({"t", bell(), 10000, 5, 1, 0});
    const double odd = res.counts.frequency("01") + res.counts.frequency("10");
    EXPECT_GE(odd, 0.16);
    EXPECT_LE(odd, 0.20);
}

TEST(Execute, ZeroNoiseIsByteIdenticalToStateVector)
{
    std::mt19937_64 rng(2);
    StateVectorBackend svb;
    MockHardwareBackend dev(hw(0.0));
    for (int t = 0; t < 20; ++t) {
        const Circuit c = oracle::random_circuit(rng, 1 + rng() % 4, 10);
        const ExecuteRequest req{"t", c, 500, static_cast<std::uint64_t>(t), 1, 0};
        EXPECT_EQ(dev.execute(req).counts, svb.execute(req).counts);
    }
}

TEST(Execute, TooLargeAndUnsupported)
{
    StateVectorBackend svb;
    EXPECT_EQ(code_of([&] { svb.execute({"t", Circuit(30), 1, 0, 1, 0}); }), Errc::circuit_too_large);
    MockHardwareConfig cfg;
    cfg.supports_mid_circuit = false;
    cfg.supports_conditionals = false;
    MockHardwareBackend dev(cfg);
    Circuit c = bell();
    c.add_if("c", 1, GateKind::x, {0});
    EXPECT_EQ(code_of([&] { dev.execute({"t", c, 1, 0, 1, 0}); }), Errc::mid_circuit_unsupported);
    TensorNetworkBackend tn("tn", 40);
    EXPECT_EQ(code_of([&] { tn.execute({"t", bell(), 1, 0, 1, 0}); }), Errc::not_implemented);
    EXPECT_EQ(code_of([&] { svb.execute({"t", bell(), 0, 0, 1, 0}); }), Errc::out_of_range);
}

TEST(Execute, TensorNetworkPluginSlot)
{
    TensorNetworkBackend tn("tn", 40, [](const ExecuteRequest& req) {
        ExecuteResult r;
        r.task_id = req.task_id;
        r.counts.shots = req.shots;
        r.counts.table["00"] = req.shots;
        return r;
    });
    const auto res = tn.execute({"t", bell(), 7, 0, 1, 0});
    EXPECT_EQ(res.counts["00"], 7u);
    EXPECT_EQ(res.backend_id, "tn");
}

TEST(Execute, RequestNotMutatedAndReproducible)
{
    StateVectorBackend svb;
    const ExecuteRequest req{"t", bell(), 300, 11, 2, 0};
    const ExecuteRequest copy = req;
    const auto a = svb.execute(req), b = svb.execute(req);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_EQ(req.circuit, copy.circuit);
    EXPECT_EQ(req.seed, copy.seed);
}

TEST(Execute, HardwareNeverOverlaps)
{
    MockHardwareBackend dev(hw(0.0));
    double prev_end = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double submitted = 0.5 * i;
        const auto r = dev.execute({"t", bell(), 100, 1, 1, submitted});
        const double start = submitted + r.queue_wait;
        EXPECT_GE(start, prev_end - 1e-12);
        prev_end = start + r.modeled_service_time;
    }
    EXPECT_DOUBLE_EQ(dev.busy_until(), prev_end);
    // 2.0 + 1e-5 * 100 * 2 per request, all queued behind the first
    EXPECT_NEAR(prev_end, 10 * (2.0 + 1e-5 * 100 * 2), 1e-9);
}

TEST(ServiceTime, Monotone)
{
    StateVectorBackend svb;
    MockHardwareBackend dev;
    Circuit small(10), big(10);
    for (int i = 0; i < 5; ++i)
        small.add(GateKind::h, {0});
    big = small;
    for (int i = 0; i < 5; ++i)
        big.add(GateKind::x, {1});
    EXPECT_LE(svb.service_time(small, 1), svb.service_time(big, 1));
    EXPECT_GE(svb.service_time(big, 1), svb.service_time(big, 2));
    EXPECT_GE(svb.service_time(big, 2), svb.service_time(big, 8));
    EXPECT_LE(dev.service_time(small, 10), dev.service_time(small, 100));
    EXPECT_LE(dev.service_time(small, 10), dev.service_time(big, 10));
}

TEST(Execute, ConcurrentExecutesOnDistinctBackends)
{
    Registry r;
    r.register_backend(std::make_shared<StateVectorBackend>());
    r.register_backend(std::make_shared<MockHardwareBackend>(hw(0.0)));
    std::vector<std::future<ExecuteResult>> futs;
    for (int i = 0; i < 8; ++i)
        futs.push_back(std::async(std::launch::async, [&r, i] {
            return r.execute(i % 2 ? "mock-hw" : "statevec", {"t", bell(), 200, 42, 1, 0});
        }));
    std::vector<sv::Counts> got;
    for (auto& f : futs)
        got.push_back(f.get().counts);
    for (const auto& c : got)
        EXPECT_EQ(c, got[0]);
}
