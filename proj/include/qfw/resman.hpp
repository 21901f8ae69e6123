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
#include <cstdint>
#include <cstdio>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "qfw/error.hpp"
#include "qfw/qpm.hpp"
#include "qfw/simenv.hpp"

/// QC-aware resource management on a simulated cluster. Hybrid jobs are
/// co-allocated an application partition and (per-job model) a simulation
/// partition atomically, or share one cluster-wide quantum device through an
/// exclusive FIFO queue (single-QC model). Time is logical.
namespace qfw::resman {

enum class Model { single_qc, per_job };

constexpr std::string_view model_name(Model m) noexcept { return m == Model::single_qc ? "single_qc" : "per_job"; }

inline Model model_from_name(std::string_view s)
{
    if (s == "single_qc")
        return Model::single_qc;
    if (s == "per_job")
        return Model::per_job;
    throw Error(Errc::invalid_spec, "unknown integration model '" + std::string(s) + "'");
}

struct ClusterConfig {
    std::size_t total_nodes = 16;
    std::optional<std::string> single_qc_device = std::string("mock-hw");
    bool backfill = false;
    /// Queued jobs examined per conservative-backfill pass.
    std::size_t backfill_depth = 64;
    std::uint64_t max_events = 10'000'000;
    /// Check every invariant after each event time (throws InvariantViolation).
    bool audit = false;
};

/// One quantum task inside a workload step, with its modeled duration on
/// the resource it will run on.
struct QuantumWork {
    std::string task_id;
    qpm::BackendKind kind = qpm::BackendKind::state_vector;
    std::size_t workers = 1;
    double duration = 0.0;
};

struct Step {
    enum class Kind { classical, quantum };
    Kind kind = Kind::classical;
    double duration = 0.0;
    std::vector<QuantumWork> tasks;

    static Step classical(double seconds) { return {Kind::classical, seconds, {}}; }
    static Step quantum(std::vector<QuantumWork> tasks) { return {Kind::quantum, 0.0, std::move(tasks)}; }
};

/// Linear job script. A manual workload holds its allocation until
/// release() is called.
struct Workload {
    std::vector<Step> steps;
    bool manual = false;
};

struct JobSpec {
    std::string job_id;
    std::size_t app_nodes = 1;
    std::size_t sim_nodes = 0;
    Model model = Model::per_job;
    Workload workload;
    double submit_time = 0.0;
    std::optional<std::vector<simenv::PartitionSpec>> sim_partitions;
};

enum class EventKind { submit, grant, device_acquire, device_release, complete, fail };

constexpr std::string_view event_kind_name(EventKind k) noexcept
{
    switch (k) {
    case EventKind::submit: return "submit";
    case EventKind::grant: return "grant";
    case EventKind::device_acquire: return "device_acquire";
    case EventKind::device_release: return "device_release";
    case EventKind::complete: return "complete";
    case EventKind::fail: return "fail";
    }
    return "?";
}

struct EventRecord {
    double time = 0.0;
    EventKind kind = EventKind::submit;
    std::string job_id;
    std::string detail;
};

struct Allocation {
    std::string job_id;
    std::vector<std::size_t> app_nodes;
    std::vector<std::size_t> sim_nodes;
    double granted_at = 0.0;
};

enum class JobState { pending, queued, running, completed, failed };

struct TaskRecord {
    std::string job_id;
    std::string task_id;
    Model model = Model::per_job;
    double requested_at = 0.0;
    double started_at = -1.0;
    double finished_at = -1.0;
    double queue_wait() const { return started_at - requested_at; }
};

struct JobMetrics {
    std::string job_id;
    JobState state = JobState::pending;
    double wait = 0.0;
    double turnaround = 0.0;
};

struct Metrics {
    std::vector<JobMetrics> jobs;
    std::vector<TaskRecord> tasks;
    std::vector<double> device_queue_waits;
    double horizon = 0.0;
    double utilization = 0.0;
    double mean_job_wait = 0.0;
    double mean_task_queue_wait = 0.0;
};

struct DeviceTicket {
    bool granted = false;
    /// 1-based position in the device queue when not granted.
    std::size_t position = 0;
};

struct Counters {
    std::size_t submitted = 0;
    std::size_t queued = 0;
    std::size_t running = 0;
    std::size_t completed = 0;
    std::size_t failed = 0;
};

inline std::string format_time(double t)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", t);
    return buf;
}

class Cluster {
public:
    explicit Cluster(ClusterConfig cfg) : cfg_(std::move(cfg)), busy_(cfg_.total_nodes, false)
    {
        if (cfg_.total_nodes == 0)
            throw Error(Errc::config_error, "cluster needs at least one node");
    }

    const ClusterConfig& config() const noexcept { return cfg_; }
    double now() const noexcept { return now_; }
    const std::vector<EventRecord>& log() const noexcept { return log_; }
    const Counters& counters() const noexcept { return counters_; }
    std::size_t free_nodes() const noexcept { return free_count_; }

    /// Validates and enqueues a job; it joins the FIFO queue at submit_time.
    const std::string& submit_job(JobSpec spec)
    {
        auto bad = [&](const std::string& why) { throw Error(Errc::invalid_spec, "job '" + spec.job_id + "': " + why); };
        if (spec.job_id.empty())
            bad("empty job id");
        if (index_.count(spec.job_id))
            bad("duplicate job id");
        if (spec.app_nodes < 1)
            bad("needs at least one application node");
        if (spec.model == Model::per_job && spec.sim_nodes < 1)
            bad("per-job model needs a simulation partition");
        if (spec.model == Model::single_qc) {
            if (spec.sim_nodes != 0)
                bad("single-QC jobs take no simulation partition");
            if (!cfg_.single_qc_device)
                bad("cluster has no shared quantum device");
        }
        if (spec.app_nodes + spec.sim_nodes > cfg_.total_nodes)
            bad("requests " + std::to_string(spec.app_nodes + spec.sim_nodes) + " of " +
                std::to_string(cfg_.total_nodes) + " nodes");
        if (spec.submit_time < now_)
            bad("submit time lies in the past");
        for (const auto& st : spec.workload.steps) {
            if (st.duration < 0.0)
                bad("negative step duration");
            for (const auto& t : st.tasks) {
                if (t.duration < 0.0)
                    bad("negative task duration");
                if (spec.model == Model::per_job && !qpm::is_simulator(t.kind))
                    bad("per-job tasks run on simulators only");
            }
        }
        Job job;
        job.partitions = simenv::configure(spec.sim_nodes, spec.sim_partitions);
        job.spec = std::move(spec);
        job.estimate = estimate_runtime(job);
        const std::size_t idx = jobs_.size();
        index_[job.spec.job_id] = idx;
        jobs_.push_back(std::move(job));
        push_event(jobs_[idx].spec.submit_time, EvType::submit, idx);
        return jobs_[idx].spec.job_id;
    }

    /// Advances the clock to the next event time and processes everything
    /// that happens at it, including grants. Returns false when idle.
    bool tick()
    {
        if (events_.empty())
            return false;
        now_ = std::max(now_, events_.top().time);
        for (;;) {
            while (!events_.empty() && events_.top().time <= now_) {
                const Event ev = events_.top();
                events_.pop();
                if (++event_count_ > cfg_.max_events)
                    throw Error(Errc::event_cap_exceeded, "simulation exceeded " + std::to_string(cfg_.max_events) + " events");
                dispatch(ev);
            }
            const bool granted = schedule_pass();
            if (!granted && (events_.empty() || events_.top().time > now_))
                break;
        }
        if (cfg_.audit)
            check_invariants();
        return true;
    }

    void run()
    {
        while (tick()) {
        }
    }

    /// Manual device request by a running single-QC job.
    DeviceTicket acquire_device(const std::string& job_id)
    {
        const std::size_t idx = lookup(job_id);
        Job& job = jobs_[idx];
        if (job.spec.model != Model::single_qc || !cfg_.single_qc_device)
            throw Error(Errc::no_device, "job '" + job_id + "' has no access to a shared device");
        if (job.state != JobState::running)
            throw Error(Errc::not_held, "job '" + job_id + "' holds no allocation");
        device_queue_.push_back({idx, manual_task, now_, next_request_seq_++});
        grant_device();
        if (device_holder_ && device_holder_->job == idx && device_holder_->task == manual_task)
            return {true, 0};
        return {false, device_queue_.size()};
    }

    void release_device(const std::string& job_id)
    {
        const std::size_t idx = lookup(job_id);
        if (!device_holder_ || device_holder_->job != idx || device_holder_->task != manual_task)
            throw Error(Errc::not_held, "job '" + job_id + "' does not hold the device");
        end_device_service();
        grant_device();
    }

    /// Returns a running job's nodes (and device, if held) and completes it.
    void release(const std::string& job_id)
    {
        const std::size_t idx = lookup(job_id);
        if (jobs_[idx].state != JobState::running)
            throw Error(Errc::not_held, "job '" + job_id + "' holds no allocation");
        finish(idx, EventKind::complete, "");
        schedule_pass();
    }

    JobState state(const std::string& job_id) const { return jobs_[lookup(job_id)].state; }

    const Allocation* allocation(const std::string& job_id) const
    {
        const Job& j = jobs_[lookup(job_id)];
        return j.state == JobState::running ? &j.alloc : nullptr;
    }

    std::optional<std::string> device_holder() const
    {
        if (!device_holder_)
            return std::nullopt;
        return jobs_[device_holder_->job].spec.job_id;
    }

    const std::vector<TaskRecord>& task_records() const noexcept { return tasks_; }

    Metrics metrics() const
    {
        Metrics m;
        m.horizon = now_;
        double busy = 0.0, wait_sum = 0.0;
        std::size_t wait_n = 0;
        for (const auto& j : jobs_) {
            if (j.state == JobState::pending)
                continue;
            JobMetrics jm{j.spec.job_id, j.state, 0.0, 0.0};
            if (j.granted) {
                jm.wait = j.alloc.granted_at - j.spec.submit_time;
                const double end = j.ended ? j.end_time : now_;
                busy += static_cast<double>(j.spec.app_nodes + j.spec.sim_nodes) * (end - j.alloc.granted_at);
                wait_sum += jm.wait;
                ++wait_n;
            } else {
                jm.wait = now_ - j.spec.submit_time;
            }
            if (j.ended)
                jm.turnaround = j.end_time - j.spec.submit_time;
            m.jobs.push_back(jm);
        }
        if (m.horizon > 0.0)
            m.utilization = busy / (static_cast<double>(cfg_.total_nodes) * m.horizon);
        m.mean_job_wait = wait_n ? wait_sum / static_cast<double>(wait_n) : 0.0;
        double tw = 0.0;
        std::size_t tn = 0;
        for (const auto& t : tasks_) {
            if (t.started_at < 0.0)
                continue;
            m.tasks.push_back(t);
            tw += t.queue_wait();
            ++tn;
            if (t.model == Model::single_qc)
                m.device_queue_waits.push_back(t.queue_wait());
        }
        m.mean_task_queue_wait = tn ? tw / static_cast<double>(tn) : 0.0;
        return m;
    }

    /// One line per record: time, kind, job id, detail (tab-separated).
    std::string export_log() const
    {
        std::string out;
        for (const auto& r : log_)
            out += format_time(r.time) + "\t" + std::string(event_kind_name(r.kind)) + "\t" + r.job_id + "\t" + r.detail + "\n";
        return out;
    }

    /// Node exclusivity, co-allocation atomicity, job conservation and FIFO
    /// device order; throws InvariantViolation.
    void check_invariants() const
    {
        auto violated = [](const std::string& what) { throw Error(Errc::invariant_violation, what); };
        std::vector<int> owner(cfg_.total_nodes, -1);
        std::size_t running = 0, queued = 0, completed = 0, failed = 0, submitted = 0;
        for (std::size_t i = 0; i < jobs_.size(); ++i) {
            const Job& j = jobs_[i];
            switch (j.state) {
            case JobState::pending: continue;
            case JobState::queued: ++queued; break;
            case JobState::running: ++running; break;
            case JobState::completed: ++completed; break;
            case JobState::failed: ++failed; break;
            }
            ++submitted;
            if (j.state != JobState::running)
                continue;
            if (j.alloc.app_nodes.size() != j.spec.app_nodes || j.alloc.sim_nodes.size() != j.spec.sim_nodes)
                violated("job '" + j.spec.job_id + "' holds a partial allocation");
            for (const auto* part : {&j.alloc.app_nodes, &j.alloc.sim_nodes})
                for (auto n : *part) {
                    if (owner[n] != -1)
                        violated("node " + std::to_string(n) + " allocated twice");
                    owner[n] = static_cast<int>(i);
                }
        }
        for (std::size_t n = 0; n < cfg_.total_nodes; ++n)
            if ((owner[n] != -1) != busy_[n])
                violated("node " + std::to_string(n) + " busy flag disagrees with allocations");
        if (submitted != counters_.submitted || queued != counters_.queued || running != counters_.running ||
            completed != counters_.completed || failed != counters_.failed ||
            counters_.submitted != counters_.completed + counters_.failed + counters_.queued + counters_.running)
            violated("job conservation broken");
        if (device_order_broken_)
            violated("device grants out of request order");
    }

private:
    static constexpr std::size_t manual_task = SIZE_MAX;

    struct Job {
        JobSpec spec;
        simenv::SimPartitionPlan partitions;
        JobState state = JobState::pending;
        Allocation alloc;
        bool granted = false;
        bool ended = false;
        double end_time = 0.0;
        double estimate = 0.0;
        std::size_t step = 0;
        std::size_t pending_tasks = 0;
        std::vector<std::size_t> step_task_records;
    };

    enum class EvType { submit, step_done, device_done };

    struct Event {
        double time;
        std::uint64_t seq;
        EvType type;
        std::size_t job;
        std::size_t task;
        bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
    };

    struct DeviceRequest {
        std::size_t job;
        std::size_t task; // index within the current step, or manual_task
        double requested_at;
        std::uint64_t seq;
    };

    std::size_t lookup(const std::string& job_id) const
    {
        auto it = index_.find(job_id);
        if (it == index_.end())
            throw Error(Errc::invalid_spec, "unknown job '" + job_id + "'");
        return it->second;
    }

    void push_event(double t, EvType type, std::size_t job, std::size_t task = 0)
    {
        events_.push({t, next_event_seq_++, type, job, task});
    }

    void record(EventKind kind, std::size_t job, std::string detail)
    {
        log_.push_back({now_, kind, jobs_[job].spec.job_id, std::move(detail)});
    }

    double estimate_runtime(const Job& job) const
    {
        double t = 0.0;
        for (const auto& st : job.spec.workload.steps) {
            if (st.kind == Step::Kind::classical) {
                t += st.duration;
            } else if (job.spec.model == Model::per_job) {
                std::vector<simenv::WorkItem> items;
                for (const auto& q : st.tasks)
                    items.push_back({q.task_id, q.kind, q.workers, q.duration});
                t += simenv::schedule(items, job.partitions).makespan;
            } else {
                for (const auto& q : st.tasks)
                    t += q.duration;
            }
        }
        return t;
    }

    void dispatch(const Event& ev)
    {
        Job& job = jobs_[ev.job];
        switch (ev.type) {
        case EvType::submit:
            job.state = JobState::queued;
            ++counters_.submitted;
            ++counters_.queued;
            queue_.push_back(ev.job);
            record(EventKind::submit, ev.job,
                   "a=" + std::to_string(job.spec.app_nodes) + " s=" + std::to_string(job.spec.sim_nodes) +
                       " model=" + std::string(model_name(job.spec.model)));
            break;
        case EvType::step_done:
            if (job.state == JobState::running && job.step == ev.task)
                start_step(ev.job, job.step + 1);
            break;
        case EvType::device_done:
            if (device_holder_ && device_holder_->job == ev.job && device_holder_->task == ev.task) {
                end_device_service();
                grant_device();
                Job& j = jobs_[ev.job];
                if (j.state == JobState::running && --j.pending_tasks == 0)
                    start_step(ev.job, j.step + 1);
            }
            break;
        }
    }

    void start_step(std::size_t idx, std::size_t k)
    {
        Job& job = jobs_[idx];
        job.step = k;
        if (job.spec.workload.manual)
            return;
        if (k >= job.spec.workload.steps.size()) {
            finish(idx, EventKind::complete, "");
            return;
        }
        const Step& st = job.spec.workload.steps[k];
        if (st.kind == Step::Kind::classical) {
            push_event(now_ + st.duration, EvType::step_done, idx, k);
            return;
        }
        job.step_task_records.clear();
        if (job.spec.model == Model::per_job) {
            std::vector<simenv::WorkItem> items;
            for (const auto& q : st.tasks)
                items.push_back({q.task_id, q.kind, q.workers, q.duration});
            const auto plan = simenv::schedule(items, job.partitions, now_);
            if (!plan.failures.empty()) {
                finish(idx, EventKind::fail,
                       std::string(errc_name(plan.failures[0].code)) + " task=" + plan.failures[0].task_id);
                return;
            }
            for (const auto& a : plan.assignments)
                tasks_.push_back({job.spec.job_id, a.task_id, Model::per_job, now_, a.start, a.end});
            push_event(now_ + plan.makespan, EvType::step_done, idx, k);
            return;
        }
        if (st.tasks.empty()) {
            push_event(now_, EvType::step_done, idx, k);
            return;
        }
        job.pending_tasks = st.tasks.size();
        for (std::size_t t = 0; t < st.tasks.size(); ++t) {
            job.step_task_records.push_back(tasks_.size());
            tasks_.push_back({job.spec.job_id, st.tasks[t].task_id, Model::single_qc, now_, -1.0, -1.0});
            device_queue_.push_back({idx, t, now_, next_request_seq_++});
        }
        grant_device();
    }

    void grant_device()
    {
        while (!device_holder_ && !device_queue_.empty()) {
            DeviceRequest req = device_queue_.front();
            device_queue_.pop_front();
            if (jobs_[req.job].state != JobState::running)
                continue;
            if (req.seq < last_device_grant_seq_)
                device_order_broken_ = true;
            last_device_grant_seq_ = req.seq;
            device_holder_ = req;
            Job& job = jobs_[req.job];
            if (req.task == manual_task) {
                record(EventKind::device_acquire, req.job, "manual");
                continue;
            }
            const auto& work = job.spec.workload.steps[job.step].tasks[req.task];
            TaskRecord& tr = tasks_[job.step_task_records[req.task]];
            tr.started_at = now_;
            record(EventKind::device_acquire, req.job, "task=" + work.task_id + " wait=" + format_time(tr.queue_wait()));
            push_event(now_ + work.duration, EvType::device_done, req.job, req.task);
        }
    }

    void end_device_service()
    {
        const DeviceRequest req = *device_holder_;
        device_holder_.reset();
        Job& job = jobs_[req.job];
        if (req.task == manual_task) {
            record(EventKind::device_release, req.job, "manual");
            return;
        }
        tasks_[job.step_task_records[req.task]].finished_at = now_;
        record(EventKind::device_release, req.job, "task=" + job.spec.workload.steps[job.step].tasks[req.task].task_id);
    }

    void finish(std::size_t idx, EventKind kind, const std::string& detail)
    {
        Job& job = jobs_[idx];
        if (device_holder_ && device_holder_->job == idx) {
            end_device_service();
        }
        std::erase_if(device_queue_, [idx](const DeviceRequest& r) { return r.job == idx; });
        for (const auto* part : {&job.alloc.app_nodes, &job.alloc.sim_nodes})
            for (auto n : *part) {
                busy_[n] = false;
                ++free_count_;
            }
        job.state = kind == EventKind::complete ? JobState::completed : JobState::failed;
        job.ended = true;
        job.end_time = now_;
        --counters_.running;
        ++(kind == EventKind::complete ? counters_.completed : counters_.failed);
        record(kind, idx, detail);
        grant_device();
    }

    std::string join(const std::vector<std::size_t>& v) const
    {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    }

    void grant(std::size_t idx)
    {
        Job& job = jobs_[idx];
        job.alloc.job_id = job.spec.job_id;
        job.alloc.granted_at = now_;
        auto take = [this](std::size_t count, std::vector<std::size_t>& into) {
            for (std::size_t n = 0; n < busy_.size() && into.size() < count; ++n)
                if (!busy_[n]) {
                    busy_[n] = true;
                    into.push_back(n);
                }
            free_count_ -= count;
        };
        take(job.spec.app_nodes, job.alloc.app_nodes);
        take(job.spec.sim_nodes, job.alloc.sim_nodes);
        job.state = JobState::running;
        job.granted = true;
        --counters_.queued;
        ++counters_.running;
        record(EventKind::grant, idx, "app=" + join(job.alloc.app_nodes) + " sim=" + join(job.alloc.sim_nodes));
        start_step(idx, 0);
    }

    std::size_t need(std::size_t idx) const { return jobs_[idx].spec.app_nodes + jobs_[idx].spec.sim_nodes; }

    /// FIFO head-of-queue grants; with backfill, conservative backfilling
    /// against a free-node profile built from runtime estimates.
    bool schedule_pass()
    {
        bool any = false;
        if (!cfg_.backfill) {
            while (!queue_.empty() && need(queue_.front()) <= free_count_) {
                const std::size_t idx = queue_.front();
                queue_.erase(queue_.begin());
                grant(idx);
                any = true;
            }
            return any;
        }

        struct Seg {
            double t;
            long free;
        };
        std::vector<Seg> profile{{now_, static_cast<long>(free_count_)}};
        {
            std::vector<std::pair<double, long>> releases;
            for (std::size_t i = 0; i < jobs_.size(); ++i)
                if (jobs_[i].state == JobState::running) {
                    const Job& j = jobs_[i];
                    // Manual jobs have no estimate; treat them as holding forever.
                    if (j.spec.workload.manual)
                        continue;
                    releases.emplace_back(std::max(j.alloc.granted_at + j.estimate, now_), static_cast<long>(need(i)));
                }
            std::sort(releases.begin(), releases.end());
            long free = static_cast<long>(free_count_);
            for (const auto& [t, n] : releases) {
                free += n;
                if (profile.back().t == t && profile.size() > 1)
                    profile.back().free = free;
                else
                    profile.push_back({t, free});
            }
        }

        std::vector<std::size_t> to_grant;
        const std::size_t depth = std::min(queue_.size(), cfg_.backfill_depth);
        for (std::size_t q = 0; q < depth; ++q) {
            const std::size_t idx = queue_[q];
            const long req = static_cast<long>(need(idx));
            const double dur = jobs_[idx].estimate;
            std::size_t start = profile.size();
            for (std::size_t i = 0; i < profile.size() && start == profile.size(); ++i) {
                bool ok = true;
                std::size_t j = i;
                do {
                    if (profile[j].free < req) {
                        ok = false;
                        break;
                    }
                    ++j;
                } while (j < profile.size() && profile[j].t < profile[i].t + dur);
                if (ok)
                    start = i;
            }
            if (start == profile.size())
                continue; // cannot fit under current estimates; keeps its place
            const double end = profile[start].t + dur;
            std::size_t stop = start + 1;
            while (stop < profile.size() && profile[stop].t < end)
                ++stop;
            if (dur > 0.0 && (stop == profile.size() || profile[stop].t > end))
                profile.insert(profile.begin() + static_cast<long>(stop), Seg{end, profile[stop - 1].free});
            for (std::size_t j = start; j < stop; ++j)
                profile[j].free -= req;
            if (start == 0)
                to_grant.push_back(idx);
        }
        for (auto idx : to_grant) {
            if (need(idx) > free_count_)
                continue;
            std::erase(queue_, idx);
            grant(idx);
            any = true;
        }
        return any;
    }

    ClusterConfig cfg_;
    std::vector<Job> jobs_;
    std::map<std::string, std::size_t> index_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::vector<std::size_t> queue_;
    std::vector<bool> busy_;
    std::size_t free_count_ = cfg_.total_nodes;
    std::deque<DeviceRequest> device_queue_;
    std::optional<DeviceRequest> device_holder_;
    std::vector<TaskRecord> tasks_;
    std::vector<EventRecord> log_;
    Counters counters_;
    double now_ = 0.0;
    std::uint64_t next_event_seq_ = 0;
    std::uint64_t next_request_seq_ = 0;
    std::uint64_t last_device_grant_seq_ = 0;
    bool device_order_broken_ = false;
    std::uint64_t event_count_ = 0;
};

} // namespace qfw::resman
