// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include "fixtures.hpp"

#include "redsharc/cli.hpp"
#include "redsharc/eigenfaces.hpp"
#include "redsharc/physical_channel.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

using namespace redsharc;
using control::Outcome;
using perfmon::EventKind;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream why;

    void require(bool cond, const std::string& msg)
    {
        if (!cond && ok) {
            ok = false;
            why << msg;
        }
    }
};

std::vector<std::uint64_t> bitsOf(const std::vector<Element>& es)
{
    std::vector<std::uint64_t> out;
    out.reserve(es.size());
    for (const auto& e : es) {
        out.push_back(e.bits());
    }
    return out;
}

std::map<dfg::PortRef, std::vector<std::uint64_t>> bitsOf(const std::map<dfg::PortRef, std::vector<Element>>& m)
{
    std::map<dfg::PortRef, std::vector<std::uint64_t>> out;
    for (const auto& [k, v] : m) {
        out[k] = bitsOf(v);
    }
    return out;
}

struct EigenRun {
    control::RunReport report;
    std::vector<eigenfaces::MatchResult> results;
};

EigenRun runEigenfaces(const eigenfaces::Dataset& data, const control::SchedulingPolicy& policy,
                       control::RunOptions opt = {}, bool pauseMidway = false)
{
    kernelapi::KernelRegistry reg;
    auto app = eigenfaces::buildEigenfacesDfg(data, reg);
    sysio::System sys(eigenfaces::defaultEigenfacesConfig());
    control::ControlKernel ck(sys, app.graph, reg, policy, opt);
    ck.start();
    EigenRun out;
    if (pauseMidway) {
        ck.pauseAll();
        std::thread engine([&] { out.report = ck.run(); });
        ck.advancePaused(25);
        ck.resume();
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        if (!ck.finished()) {
            try {
                ck.pauseAll();
                (void)ck.debugStatus();
                ck.resume();
            } catch (const Error&) {
                // The run may have ended between the check and the pause.
            }
        }
        engine.join();
    } else {
        out.report = ck.run();
    }
    if (out.report.outcome == Outcome::COMPLETED) {
        out.results = eigenfaces::pipelineResults(out.report, app);
    }
    return out;
}

eigenfaces::Dataset acceptanceDataset(std::uint64_t seed)
{
    return eigenfaces::generateSyntheticDataset(seed, 10, 3, 16, 16, 20);
}

// ---------------------------------------------------------------------------

Check oracleEquivalence()
{
    Check c;
    std::size_t samples = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto data = acceptanceDataset(seed);
        const auto oracle = eigenfaces::sequentialOracle(data);
        const auto run = runEigenfaces(data, control::policyFifo());
        c.require(run.report.outcome == Outcome::COMPLETED, "seed " + std::to_string(seed) + " did not complete");
        c.require(run.results.size() == oracle.size() && oracle.size() == 20, "sample count differs");
        for (std::size_t s = 0; s < std::min(run.results.size(), oracle.size()); ++s) {
            ++samples;
            c.require(run.results[s].subject == oracle[s].subject, "subject differs");
            const double scale = std::max(std::abs(oracle[s].distance), 1e-300);
            c.require(std::abs(run.results[s].distance - oracle[s].distance) <= 1e-9 * scale, "distance differs");
        }
    }
    if (c.ok) {
        c.why << samples << " samples over 5 datasets match";
    }
    return c;
}

Check streamSemantics()
{
    Check c;
    const KernelId prod{1};
    const KernelId cons{2};
    for (std::uint64_t seed = 1; seed <= 3 && c.ok; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t depth = 1 + rng() % 16;
        ssn::Ssn net(2);
        auto s = net.createStream(ElementType::U64, depth);
        net.routeStream(s, {prod, 0, ssn::Direction::PRODUCER}, {cons, 0, ssn::Direction::CONSUMER});
        std::deque<std::uint64_t> ref;
        std::size_t popped = 0;
        std::size_t pushed = 0;
        while (popped < 10000 && c.ok) {
            const auto op = rng() % 10;
            if (op < 5 && pushed < 10000) {
                const auto v = rng();
                const bool ok = net.tryPush(s, prod, Element::u64(v));
                c.require(ok == (ref.size() < depth), "push acceptance disagrees with capacity");
                if (ok) {
                    ref.push_back(v);
                    ++pushed;
                }
            } else if (op < 8) {
                auto e = net.tryPop(s, cons);
                c.require(e.has_value() == !ref.empty(), "pop availability wrong");
                if (e && !ref.empty()) {
                    c.require(e->as<std::uint64_t>() == ref.front(), "FIFO order violated");
                    ref.pop_front();
                    ++popped;
                }
            } else if (op < 9) {
                const auto before = net.descriptor(s).popped;
                auto a = net.tryPeek(s, cons);
                auto b = net.tryPeek(s, cons);
                c.require(a.has_value() == b.has_value() && (!a || *a == *b), "peek not repeatable");
                c.require(net.descriptor(s).popped == before, "peek removed an element");
            } else {
                bool rejected = false;
                try {
                    net.tryPush(s, cons, Element::u64(0));
                } catch (const Error& e) {
                    rejected = e.code() == ErrorCode::NotEndpoint;
                }
                c.require(rejected, "push by consumer accepted");
                rejected = false;
                try {
                    (void)net.tryPop(s, prod);
                } catch (const Error& e) {
                    rejected = e.code() == ErrorCode::NotEndpoint;
                }
                c.require(rejected, "pop by producer accepted");
            }
            c.require(net.streamLevel(s) <= depth, "occupancy exceeded depth");
            c.require(net.streamLevel(s) == ref.size(), "occupancy disagrees with reference");
        }
    }
    // Blocking wake-ups through the engine: a depth-1 chain still delivers everything in order.
    auto reg = fixtures::standardRegistry();
    dfg::Dfg g;
    g.initKernel(KernelId{1}, "SRC", 0, 1);
    g.initKernel(KernelId{2}, "RELAY", 1, 1);
    g.addOutputStream(KernelId{1}, 0, ElementType::U32, 200, 1);
    g.addOutputStream(KernelId{2}, 0, ElementType::U32, 200, 1);
    g.addStreamDependency(KernelId{2}, 0, KernelId{1}, 0);
    sysio::System sys(fixtures::config({fixtures::processor(0)}));
    auto r = control::runSystem(sys, g, reg, control::policyFifo());
    c.require(r.outcome == Outcome::COMPLETED, "depth-1 chain did not complete");
    if (r.outcome == Outcome::COMPLETED) {
        const auto& out = r.outputs.at({KernelId{2}, 0});
        for (std::size_t i = 0; i < out.size(); ++i) {
            c.require(out[i].as<std::uint32_t>() == 2 * (i + 1), "relay output wrong after wake-ups");
        }
        c.require(r.counters.count(EventKind::STALL) > 0, "no suspension happened");
    }
    if (c.ok) {
        c.why << "3 x 10000-element reference runs, SPSC rejections, depth-1 wake-ups";
    }
    return c;
}

Check resourceLifecycle()
{
    Check c;
    std::size_t completed = 0;
    auto reg = fixtures::standardRegistry();
    for (std::uint64_t seed = 1; seed <= 1000 && completed < 30 && c.ok; ++seed) {
        const auto cfg = fixtures::randomConfig(seed);
        const auto g = fixtures::randomDfg(seed, 10, true);
        auto run = fixtures::runAudited(cfg, g, reg, control::policyFifo());
        c.require(!run.timedOut, "watchdog fired on seed " + std::to_string(seed));
        if (run.report.outcome != Outcome::COMPLETED) {
            continue;
        }
        ++completed;
        const auto& r = run.report;
        c.require(r.streamsCreated == r.streamsFreed, "stream leak on seed " + std::to_string(seed));
        c.require(r.blocksAllocated == r.blocksFreed, "block leak on seed " + std::to_string(seed));
        c.require(r.poolsAtEnd.onChipUsed == 0 && r.poolsAtEnd.offChipUsed == 0, "pool not empty at end");
        const auto violations = fixtures::auditTrace(run, cfg);
        c.require(violations.empty(), violations.empty() ? "" : violations.front());
    }
    const auto ef = runEigenfaces(acceptanceDataset(1), control::policyFifo());
    c.require(ef.report.outcome == Outcome::COMPLETED, "eigenfaces did not complete");
    c.require(ef.report.streamsCreated == ef.report.streamsFreed && ef.report.blocksAllocated == ef.report.blocksFreed,
              "eigenfaces leaked");
    c.require(ef.report.poolsAtEnd.onChipUsed == 0 && ef.report.poolsAtEnd.offChipUsed == 0,
              "eigenfaces pools not empty");
    c.require(completed >= 30, "too few completed random runs (" + std::to_string(completed) + ")");
    if (c.ok) {
        c.why << completed << " random runs plus eigenfaces balanced";
    }
    return c;
}

Check interleavingTransparency()
{
    Check c;
    // Four logical streams sharing one physical port.
    ssn::Ssn net(8);
    const KernelId prod{1};
    std::vector<StreamId> streams;
    for (PortIndex p = 0; p < 4; ++p) {
        auto s = net.createStream(ElementType::U64, 4);
        net.routeStream(s, {prod, p, ssn::Direction::PRODUCER}, {KernelId{10 + p}, 0, ssn::Direction::CONSUMER});
        streams.push_back(s);
    }
    net.bindLogicalChannels(CoreId{0}, 0, streams, prod);
    std::mt19937_64 rng(99);
    std::vector<std::deque<std::uint64_t>> expected(4);
    std::size_t sent = 0;
    std::size_t received = 0;
    for (std::size_t guard = 0; received < 10000 && guard < 10000000; ++guard) {
        const auto l = rng() % 4;
        if (sent < 10000 && rng() % 2) {
            const auto v = (static_cast<std::uint64_t>(l) << 56) | (rng() >> 8);
            if (net.tryPush(streams[l], prod, Element::u64(v))) {
                expected[l].push_back(v);
                ++sent;
            }
        } else if (auto e = net.tryPop(streams[l], KernelId{10 + static_cast<std::uint32_t>(l)})) {
            c.require(!expected[l].empty() && e->as<std::uint64_t>() == expected[l].front(),
                      "logical order broken on lane " + std::to_string(l));
            if (!expected[l].empty()) {
                expected[l].pop_front();
            }
            ++received;
        }
        net.pump();
        c.require(net.streamLevel(streams[l]) <= 4, "occupancy exceeded depth on shared port");
    }
    c.require(received == 10000, "only " + std::to_string(received) + " of 10000 elements arrived");

    // One logical stream over one port against a direct route.
    auto transcript = [](bool shared) {
        ssn::Ssn n(2);
        auto s = n.createStream(ElementType::U32, 3);
        n.routeStream(s, {KernelId{1}, 0, ssn::Direction::PRODUCER}, {KernelId{2}, 0, ssn::Direction::CONSUMER});
        if (shared) {
            n.bindLogicalChannels(CoreId{0}, 0, {s}, KernelId{1});
        }
        std::mt19937 r(8);
        std::ostringstream log;
        std::uint32_t next = 0;
        for (int i = 0; i < 20000; ++i) {
            if (r() % 2) {
                const bool ok = n.tryPush(s, KernelId{1}, Element::u32(next));
                log << (ok ? 'P' : 'p');
                next += ok ? 1 : 0;
            } else if (auto e = n.tryPop(s, KernelId{2})) {
                log << 'G' << e->as<std::uint32_t>();
            } else {
                log << 'g';
            }
            log << n.streamLevel(s);
            n.pump();
        }
        return log.str();
    };
    c.require(transcript(true) == transcript(false), "1-over-1 differs from direct routing");

    // The same through the engine: a 4-output hardware source on a 1-port slot.
    auto reg = fixtures::standardRegistry();
    dfg::Dfg g;
    g.initKernel(KernelId{1}, "HWSRC", 0, 4);
    for (PortIndex p = 0; p < 4; ++p) {
        g.addOutputStream(KernelId{1}, p, ElementType::U32, 100, 4);
    }
    auto outputsWith = [&](std::uint32_t ports) {
        sysio::System sys(fixtures::config({fixtures::processor(0), fixtures::slot(1, 100, ports, 4)}));
        return control::runSystem(sys, g, reg, control::policyFifo());
    };
    const auto direct = outputsWith(4);
    const auto shared = outputsWith(1);
    c.require(direct.outcome == Outcome::COMPLETED && shared.outcome == Outcome::COMPLETED, "engine runs failed");
    c.require(bitsOf(direct.outputs) == bitsOf(shared.outputs), "engine outputs differ with shared port");
    if (c.ok) {
        c.why << "10000 tagged elements in order; 1-over-1 transcript identical";
    }
    return c;
}

Check schedulingConstraints()
{
    Check c;
    auto reg = fixtures::standardRegistry();
    std::size_t runs = 0;
    std::size_t deadlocks = 0;
    for (std::uint64_t seed = 100; seed < 250 && c.ok; ++seed) {
        const auto cfg = fixtures::randomConfig(seed);
        const auto g = fixtures::randomDfg(seed, 12, true);
        auto run = fixtures::runAudited(cfg, g, reg, control::policyFifo());
        ++runs;
        c.require(!run.timedOut, "watchdog fired on seed " + std::to_string(seed));
        c.require(run.report.outcome != Outcome::ERROR || run.report.errorCode == ErrorCode::ConfigMismatch,
                  "unexpected error on seed " + std::to_string(seed));
        deadlocks += run.report.outcome == Outcome::DEADLOCK;
        const auto violations = fixtures::auditTrace(run, cfg);
        c.require(violations.empty(), violations.empty() ? "" : "seed " + std::to_string(seed) + ": " + violations.front());
    }

    // Constructed deadlocks must end as DEADLOCK well within the watchdog.
    const auto cycle = fixtures::runAudited(fixtures::config({fixtures::processor(0)}), fixtures::relayCycle(), reg,
                                            control::policyFifo());
    c.require(!cycle.timedOut && cycle.report.outcome == Outcome::DEADLOCK, "stream cycle did not deadlock");

    dfg::Dfg starved = fixtures::streamChain(4);
    const auto st = fixtures::runAudited(fixtures::config({fixtures::processor(0)}), starved, reg,
                                         control::policyStatic({{KernelId{1}, CoreId{0}}, {KernelId{3}, CoreId{0}}}));
    c.require(!st.timedOut && st.report.outcome == Outcome::DEADLOCK, "unplaced kernel did not deadlock");

    dfg::Dfg hwOnly = fixtures::streamChain(4, true);
    const auto nohw = fixtures::runAudited(fixtures::config({fixtures::processor(0)}), hwOnly, reg,
                                           control::policyFifo());
    c.require(!nohw.timedOut && nohw.report.outcome == Outcome::DEADLOCK, "kernel without a core did not deadlock");

    if (c.ok) {
        c.why << runs << " random runs audited (" << deadlocks << " deadlocked), 3 constructed deadlocks";
    }
    return c;
}

std::map<KernelId, CoreId> eigenfacesStaticPlacement()
{
    namespace ids = eigenfaces::kernel_ids;
    return {{KernelId{ids::source}, CoreId{1}},   {KernelId{ids::mean}, CoreId{0}},
            {KernelId{ids::prepare}, CoreId{2}},  {KernelId{ids::subtract}, CoreId{1}},
            {KernelId{ids::project}, CoreId{2}},  {KernelId{ids::match}, CoreId{0}}};
}

Check scheduleIndependence()
{
    Check c;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto data = acceptanceDataset(seed);
        control::RunOptions opt;
        opt.captureStreams = true;
        const auto fifo = runEigenfaces(data, control::policyFifo(), opt);
        const auto fixed = runEigenfaces(data, control::policyStatic(eigenfacesStaticPlacement()), opt);
        const auto paused = runEigenfaces(data, control::policyFifo(), opt, true);
        const auto tag = " (seed " + std::to_string(seed) + ")";
        c.require(fifo.report.outcome == Outcome::COMPLETED, "fifo run failed" + tag);
        c.require(fixed.report.outcome == Outcome::COMPLETED, "static run failed" + tag);
        c.require(paused.report.outcome == Outcome::COMPLETED, "paused run failed" + tag);
        c.require(bitsOf(fifo.report.outputs) == bitsOf(fixed.report.outputs), "static outputs differ" + tag);
        c.require(bitsOf(fifo.report.captured) == bitsOf(fixed.report.captured), "static streams differ" + tag);
        c.require(bitsOf(fifo.report.outputs) == bitsOf(paused.report.outputs), "paused outputs differ" + tag);
        c.require(bitsOf(fifo.report.captured) == bitsOf(paused.report.captured), "paused streams differ" + tag);
        c.require(fifo.results == fixed.results && fifo.results == paused.results, "classification differs" + tag);
        std::set<std::uint32_t> coresUsed;
        for (const auto& ev : fixed.report.trace) {
            if (ev.kind == EventKind::LAUNCH && ev.resource) {
                coresUsed.insert(static_cast<std::uint32_t>(std::stoul(ev.resource->substr(5))));
            }
        }
        c.require(coresUsed == std::set<std::uint32_t>{0, 1, 2}, "static placement not applied" + tag);
    }
    if (c.ok) {
        c.why << "fifo, static and paused runs identical on 3 datasets";
    }
    return c;
}

Check modeTransparency()
{
    Check c;
    const auto data = acceptanceDataset(7);
    kernelapi::KernelRegistry reg;
    auto app = eigenfaces::buildEigenfacesDfg(data, reg);
    std::vector<control::RunReport> reports;
    for (auto mode : {RunMode::ANALYSIS, RunMode::RELEASE}) {
        sysio::System sys(eigenfaces::defaultEigenfacesConfig());
        control::RunOptions opt;
        opt.mode = mode;
        control::ControlKernel ck(sys, app.graph, reg, control::policyFifo(), opt);
        ck.start();
        auto r = ck.run();
        c.require(r.outcome == Outcome::COMPLETED, std::string(runModeName(mode)) + " run failed");
        if (mode == RunMode::ANALYSIS) {
            for (const auto& [id, node] : app.graph.nodes()) {
                for (PortIndex p = 0; p < node.numOutputs(); ++p) {
                    const auto& decl = *node.outputs[p];
                    if (decl.kind != dfg::EdgeKind::STREAM) {
                        continue;
                    }
                    const auto s = ck.streamOf({id, p});
                    c.require(s.has_value(), "stream missing");
                    if (!s) {
                        continue;
                    }
                    const auto name = perfmon::resourceName(*s);
                    const auto pushes = r.counters.count(name, EventKind::PUSH);
                    const auto pops = r.counters.count(name, EventKind::POP);
                    c.require(pushes == decl.length && pops == decl.length,
                              name + " carried " + std::to_string(pushes) + "/" + std::to_string(pops) + " of " +
                                  std::to_string(decl.length));
                }
            }
        } else {
            c.require(r.counters.allZero(), "release counters not zero");
            c.require(r.trace.empty(), "release trace not empty");
        }
        reports.push_back(std::move(r));
    }
    if (reports.size() == 2) {
        c.require(bitsOf(reports[0].outputs) == bitsOf(reports[1].outputs), "mode changes outputs");
        c.require(eigenfaces::pipelineResults(reports[0], app) == eigenfaces::pipelineResults(reports[1], app),
                  "mode changes classification");
    }
    if (c.ok) {
        c.why << "outputs identical; release silent; per-stream counts equal declared lengths";
    }
    return c;
}

Check numerics()
{
    Check c;
    std::mt19937_64 rng(8080);
    std::uniform_int_distribution<std::size_t> dim(1, 32);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worstRec = 0.0;
    double worstOrth = 0.0;
    double worstSig = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto rows = dim(rng);
        const auto cols = dim(rng);
        eigenfaces::Matrix a(rows, cols);
        for (double& x : a.data) {
            x = u(rng);
        }
        const auto s = eigenfaces::svd(a);
        const auto rank = std::min(rows, cols);
        c.require(s.S.size() == rank, "wrong rank");
        c.require(std::is_sorted(s.S.rbegin(), s.S.rend()), "singular values unsorted");
        Eigen::MatrixXd A(rows, cols);
        Eigen::MatrixXd U(rows, rank);
        Eigen::MatrixXd V(cols, rank);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                A(i, j) = a(i, j);
            }
            for (std::size_t k = 0; k < rank; ++k) {
                U(i, k) = s.U(i, k);
            }
        }
        for (std::size_t i = 0; i < cols; ++i) {
            for (std::size_t k = 0; k < rank; ++k) {
                V(i, k) = s.V(i, k);
            }
        }
        Eigen::VectorXd S(rank);
        for (std::size_t k = 0; k < rank; ++k) {
            S(k) = s.S[k];
        }
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(rank, rank);
        worstRec = std::max(worstRec, (A - U * S.asDiagonal() * V.transpose()).norm() / A.norm());
        worstOrth = std::max({worstOrth, (U.transpose() * U - I).cwiseAbs().maxCoeff(),
                              (V.transpose() * V - I).cwiseAbs().maxCoeff()});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rows >= cols ? Eigen::MatrixXd(A.transpose() * A)
                                                                       : Eigen::MatrixXd(A * A.transpose()));
        for (std::size_t k = 0; k < rank; ++k) {
            const double oracle =
                std::sqrt(std::max(0.0, es.eigenvalues()(static_cast<Eigen::Index>(rank - 1 - k))));
            worstSig = std::max(worstSig, std::abs(s.S[k] - oracle) / std::max(1.0, s.S[0]));
        }
    }
    c.require(worstRec <= 1e-9, "reconstruction error too large");
    c.require(worstOrth <= 1e-10, "orthonormality error too large");
    c.require(worstSig <= 1e-9, "singular values disagree with eigen oracle");
    c.why << (c.ok ? "" : ": ") << "200 matrices, max rel reconstruction " << worstRec << ", max orthonormality "
          << worstOrth << ", max singular value gap " << worstSig;
    return c;
}

Check cliContract()
{
    Check c;
    const auto dir = fs::temp_directory_path() / "redsharc_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    };
    auto call = [](std::vector<std::string> args) {
        args.insert(args.begin(), "redsharc");
        std::vector<const char*> argv;
        for (const auto& a : args) {
            argv.push_back(a.c_str());
        }
        std::istringstream in;
        std::ostringstream out;
        std::ostringstream err;
        return cliMain(static_cast<int>(argv.size()), argv.data(), in, out, err);
    };

    const auto cfg = fixtures::config({fixtures::processor(0), fixtures::slot(1)});
    const auto cfgPath = write("config.json", sysio::renderConfig(cfg));
    const auto tracePath = (dir / "t.jsonl").string();
    c.require(call({"run", "--app", "eigenfaces", "--config",
                    write("ef.json", sysio::renderConfig(eigenfaces::defaultEigenfacesConfig())), "--policy", "fifo",
                    "--mode", "analysis", "--trace", tracePath}) == 0,
              "eigenfaces run did not exit 0");
    c.require(call({"run", "--config", cfgPath, "--dfg", write("cycle.json", dfg::renderDfg(fixtures::relayCycle()))}) ==
                  2,
              "deadlock did not exit 2");
    c.require(call({"run", "--config", write("bad.json", "{\"cores\":"), "--dfg", cfgPath}) == 1,
              "parse failure did not exit 1");
    c.require(call({"run", "--nonsense"}) == 1, "usage error did not exit 1");
    dfg::Dfg unbound;
    unbound.initKernel(KernelId{1}, "RELAY", 1, 1);
    unbound.addOutputStream(KernelId{1}, 0, ElementType::U32, 1);
    c.require(call({"validate", "--config", cfgPath, "--dfg", write("u.json", dfg::renderDfg(unbound))}) == 1,
              "invalid graph did not exit 1");

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto rc = fixtures::randomConfig(seed);
        c.require(sysio::parseConfig(sysio::renderConfig(rc)) == rc, "config round-trip failed");
        const auto g = fixtures::randomDfg(seed, 12, true);
        c.require(dfg::parseDfg(dfg::renderDfg(g)) == g, "DFG round-trip failed");
    }
    std::ifstream in(tracePath);
    std::stringstream original;
    original << in.rdbuf();
    const auto events = perfmon::parseTrace(original, perfmon::TraceFormat::JSONL);
    std::ostringstream again;
    perfmon::exportTrace(again, events, perfmon::TraceFormat::JSONL);
    c.require(!events.empty() && again.str() == original.str(), "trace JSONL round-trip failed");
    fs::remove_all(dir);
    if (c.ok) {
        c.why << "exit codes 0/2/1; config, DFG and " << events.size() << "-event trace round-trips";
    }
    return c;
}

} // namespace

int main()
{
    struct Criterion {
        const char* id;
        const char* name;
        double budgetSeconds;
        std::function<Check()> fn;
    };
    const std::vector<Criterion> criteria{
        {"AC1", "oracle equivalence", 10, oracleEquivalence},
        {"AC2", "stream semantics", 5, streamSemantics},
        {"AC3", "resource lifecycle", 5, resourceLifecycle},
        {"AC4", "interleaving transparency", 5, interleavingTransparency},
        {"AC5", "scheduling constraints", 30, schedulingConstraints},
        {"AC6", "schedule independence", 15, scheduleIndependence},
        {"AC7", "mode transparency", 10, modeTransparency},
        {"AC8", "numerics", 20, numerics},
        {"AC9", "CLI contract", 5, cliContract},
    };
    int failures = 0;
    for (const auto& cr : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = cr.fn();
        } catch (const std::exception& e) {
            c.ok = false;
            c.why << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > cr.budgetSeconds) {
            c.ok = false;
            c.why << " (took " << secs << " s, budget " << cr.budgetSeconds << " s)";
        }
        std::cout << cr.id << ' ' << (c.ok ? "PASS" : "FAIL") << "  " << cr.name << ": " << c.why.str() << " ["
                  << std::fixed << std::setprecision(2) << secs << " s]" << std::defaultfloat << '\n';
        failures += c.ok ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
