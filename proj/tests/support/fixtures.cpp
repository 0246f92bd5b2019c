#include "fixtures.hpp"

#include <future>
#include <random>
#include <set>
#include <sstream>

namespace fixtures {

using dfg::EdgeKind;
using perfmon::EventKind;

sysio::CoreSpec processor(std::uint32_t id, std::uint32_t dma, std::uint32_t maxResident)
{
    return {CoreId{id}, sysio::CoreKind::PROCESSOR, dma, maxResident, 0, 0, 0};
}

sysio::CoreSpec slot(std::uint32_t id, std::uint32_t area, std::uint32_t streamPorts, std::uint32_t blockPorts)
{
    return {CoreId{id}, sysio::CoreKind::FABRIC_SLOT, 0, 0, area, streamPorts, blockPorts};
}

sysio::SystemConfig config(std::vector<sysio::CoreSpec> cores, std::size_t onChip, std::size_t offChip)
{
    sysio::SystemConfig cfg;
    cfg.cores = std::move(cores);
    cfg.memory = {onChip, offChip};
    return cfg;
}

kernelapi::KernelRegistry standardRegistry()
{
    kernelapi::KernelRegistry r;
    kernelapi::registerStandardKernels(r);
    return r;
}

dfg::Dfg streamChain(std::size_t length, bool hardwareMiddle)
{
    dfg::Dfg g;
    g.initKernel(KernelId{1}, "SRC", 0, 1);
    g.initKernel(KernelId{2}, hardwareMiddle ? "HWRELAY" : "RELAY", 1, 1);
    g.initKernel(KernelId{3}, "SINK", 1, 0);
    g.addOutputStream(KernelId{1}, 0, ElementType::U32, length);
    g.addOutputStream(KernelId{2}, 0, ElementType::U32, length);
    g.addStreamDependency(KernelId{2}, 0, KernelId{1}, 0);
    g.addStreamDependency(KernelId{3}, 0, KernelId{2}, 0);
    return g;
}

dfg::Dfg relayCycle()
{
    dfg::Dfg g;
    g.initKernel(KernelId{1}, "RELAY", 1, 1);
    g.initKernel(KernelId{2}, "RELAY", 1, 1);
    g.addOutputStream(KernelId{1}, 0, ElementType::U32, 4);
    g.addOutputStream(KernelId{2}, 0, ElementType::U32, 4);
    g.addStreamDependency(KernelId{1}, 0, KernelId{2}, 0);
    g.addStreamDependency(KernelId{2}, 0, KernelId{1}, 0);
    return g;
}

AuditedRun runAudited(const sysio::SystemConfig& cfg, const dfg::Dfg& g, const kernelapi::KernelRegistry& registry,
                      const control::SchedulingPolicy& policy, control::RunOptions options,
                      std::chrono::milliseconds watchdog)
{
    sysio::System sys(cfg);
    control::ControlKernel ck(sys, g, registry, policy, options);
    ck.start();
    auto fut = std::async(std::launch::async, [&] { return ck.run(); });
    AuditedRun out;
    if (fut.wait_for(watchdog) != std::future_status::ready) {
        out.timedOut = true;
        ck.abort();
    }
    out.report = fut.get();
    for (const auto& [id, node] : g.nodes()) {
        for (PortIndex o = 0; o < node.numOutputs(); ++o) {
            if (!node.outputs[o]) {
                continue;
            }
            std::vector<KernelId> ends{id};
            for (const auto& c : g.consumersOf(id, o)) {
                ends.push_back(c.kernel);
            }
            if (auto s = ck.streamOf({id, o})) {
                out.endpoints[perfmon::resourceName(*s)] = ends;
            }
            if (auto b = ck.blockOf({id, o})) {
                out.endpoints[perfmon::resourceName(*b)] = ends;
                out.blockProducer[perfmon::resourceName(*b)] = id;
            }
        }
        for (const auto& in : node.inputs) {
            if (in && in->kind == EdgeKind::BLOCK) {
                out.blockProducersOf[id].push_back(in->producer);
            }
        }
    }
    return out;
}

namespace {

std::map<std::string, std::string> parseDetail(const std::string& detail)
{
    std::map<std::string, std::string> out;
    std::istringstream in(detail);
    for (std::string tok; in >> tok;) {
        auto eq = tok.find('=');
        if (eq != std::string::npos) {
            out[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
    }
    return out;
}

std::vector<std::uint32_t> parseList(const std::string& text)
{
    std::vector<std::uint32_t> out;
    std::istringstream in(text);
    for (std::string tok; std::getline(in, tok, ',');) {
        if (!tok.empty()) {
            out.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
        }
    }
    return out;
}

} // namespace

std::vector<std::string> auditTrace(const AuditedRun& run, const sysio::SystemConfig& cfg)
{
    std::vector<std::string> bad;
    std::map<std::string, const sysio::CoreSpec*> cores;
    for (const auto& c : cfg.cores) {
        cores[perfmon::resourceName(c.id)] = &c;
    }
    struct Live {
        std::uint32_t residents = 0;
        std::uint32_t area = 0;
        std::uint32_t streamPorts = 0;
        std::uint32_t blockPorts = 0;
    };
    std::map<std::string, Live> live;
    // Kernel -> (area, ports) it holds while placed.
    std::map<KernelId, std::map<std::string, std::string>> launched;
    std::map<KernelId, std::uint32_t> residentArea;
    std::set<KernelId> finished;

    for (const auto& ev : run.report.trace) {
        const std::string where = "seq " + std::to_string(ev.seq) + " " + std::string(perfmon::eventKindName(ev.kind));
        const std::string res = ev.resource.value_or("");
        if (ev.kind == EventKind::RECONFIG) {
            auto d = parseDetail(ev.detail);
            for (auto k : parseList(d["evict"])) {
                auto it = residentArea.find(KernelId{k});
                if (it == residentArea.end() || finished.count(KernelId{k}) == 0) {
                    bad.push_back(where + ": evicted kernel " + std::to_string(k) + " was not a finished resident");
                    continue;
                }
                live[res].area -= it->second;
                residentArea.erase(it);
            }
        } else if (ev.kind == EventKind::LAUNCH && ev.kernel) {
            auto d = parseDetail(ev.detail);
            const auto* spec = cores.at(res);
            auto& l = live[res];
            for (auto p : run.blockProducersOf.count(*ev.kernel) ? run.blockProducersOf.at(*ev.kernel)
                                                                  : std::vector<KernelId>{}) {
                if (finished.count(p) == 0) {
                    bad.push_back(where + ": kernel " + std::to_string(ev.kernel->value) +
                                  " launched before block producer " + std::to_string(p.value) + " finished");
                }
            }
            if (d.count("reuse")) {
                KernelId prev{static_cast<std::uint32_t>(std::stoul(d["reuse"]))};
                l.area -= residentArea[prev];
                residentArea.erase(prev);
            }
            const auto area = static_cast<std::uint32_t>(std::stoul(d["area"]));
            l.residents += 1;
            l.streamPorts += static_cast<std::uint32_t>(std::stoul(d["streamPorts"]));
            l.blockPorts += static_cast<std::uint32_t>(std::stoul(d["blockPorts"]));
            if (spec->kind == sysio::CoreKind::FABRIC_SLOT) {
                l.area += area;
                residentArea[*ev.kernel] = area;
                if (l.area > spec->area) {
                    bad.push_back(where + ": slot area " + std::to_string(l.area) + " > " + std::to_string(spec->area));
                }
                if (l.blockPorts > spec->blockPorts) {
                    bad.push_back(where + ": block ports " + std::to_string(l.blockPorts) + " > " +
                                  std::to_string(spec->blockPorts));
                }
            } else if (l.residents > spec->maxResident) {
                bad.push_back(where + ": residents " + std::to_string(l.residents) + " > " +
                              std::to_string(spec->maxResident));
            }
            if (l.streamPorts > spec->streamPortCount()) {
                bad.push_back(where + ": stream ports " + std::to_string(l.streamPorts) + " > " +
                              std::to_string(spec->streamPortCount()));
            }
            launched[*ev.kernel] = d;
        } else if (ev.kind == EventKind::FINISH && ev.kernel) {
            auto it = launched.find(*ev.kernel);
            if (it == launched.end()) {
                bad.push_back(where + ": kernel " + std::to_string(ev.kernel->value) + " finished without launching");
                continue;
            }
            auto& l = live[res];
            l.residents -= 1;
            l.streamPorts -= static_cast<std::uint32_t>(std::stoul(it->second["streamPorts"]));
            l.blockPorts -= static_cast<std::uint32_t>(std::stoul(it->second["blockPorts"]));
            finished.insert(*ev.kernel);
        } else if (ev.kind == EventKind::FREE) {
            auto it = run.endpoints.find(res);
            if (it == run.endpoints.end()) {
                bad.push_back(where + ": unknown resource " + res);
                continue;
            }
            for (auto k : it->second) {
                if (finished.count(k) == 0) {
                    bad.push_back(where + ": " + res + " freed before kernel " + std::to_string(k.value) + " finished");
                }
            }
        }
    }
    for (const auto& [k, history] : run.report.lifecycleHistory) {
        if (!isMonotoneLifecycle(history)) {
            bad.push_back("kernel " + std::to_string(k.value) + " lifecycle is not monotone");
        }
    }
    return bad;
}

dfg::Dfg randomDfg(std::uint64_t seed, std::size_t maxKernels, bool allowHw)
{
    std::mt19937_64 rng(seed);
    auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };
    const std::size_t n = pick(2, maxKernels);

    struct Edge {
        std::uint32_t from;
        std::uint32_t to;
        EdgeKind kind;
    };
    std::vector<Edge> edges;
    std::vector<std::size_t> inputs(n + 1, 0);
    std::vector<std::size_t> outputs(n + 1, 0);
    for (std::uint32_t k = 2; k <= n; ++k) {
        const auto fanIn = pick(0, 2);
        for (std::uint64_t e = 0; e < fanIn; ++e) {
            const auto from = static_cast<std::uint32_t>(pick(1, k - 1));
            edges.push_back({from, k, pick(0, 2) == 0 ? EdgeKind::BLOCK : EdgeKind::STREAM});
        }
    }
    dfg::Dfg g;
    std::vector<std::string> impls(n + 1);
    for (std::uint32_t k = 1; k <= n; ++k) {
        for (const auto& e : edges) {
            inputs[k] += e.to == k;
            outputs[k] += e.from == k;
        }
        const bool terminal = outputs[k] == 0 && pick(0, 1) == 1;
        outputs[k] += terminal;
        std::string base = inputs[k] == 0 ? "SRC" : (outputs[k] == 0 ? "SINK" : "RELAY");
        impls[k] = (allowHw && pick(0, 3) == 0 ? "HW" : "") + base;
        g.initKernel(KernelId{k}, impls[k], inputs[k], outputs[k]);
    }
    std::vector<PortIndex> nextIn(n + 1, 0);
    std::vector<PortIndex> nextOut(n + 1, 0);
    for (const auto& e : edges) {
        const PortIndex op = nextOut[e.from]++;
        const PortIndex ip = nextIn[e.to]++;
        const auto len = pick(1, 24);
        if (e.kind == EdgeKind::STREAM) {
            g.addOutputStream(KernelId{e.from}, op, ElementType::U32, len,
                              pick(0, 1) ? std::optional<std::size_t>(pick(1, 8)) : std::nullopt);
            g.addStreamDependency(KernelId{e.to}, ip, KernelId{e.from}, op);
        } else {
            g.addOutputBlock(KernelId{e.from}, op, ElementType::U32, len);
            g.addBlockDependency(KernelId{e.to}, ip, KernelId{e.from}, op);
        }
    }
    for (std::uint32_t k = 1; k <= n; ++k) {
        if (nextOut[k] < outputs[k]) {
            if (pick(0, 1)) {
                g.addOutputStream(KernelId{k}, nextOut[k], ElementType::U32, pick(1, 24));
            } else {
                g.addOutputBlock(KernelId{k}, nextOut[k], ElementType::U32, pick(1, 24));
            }
        }
    }
    return g;
}

sysio::SystemConfig randomConfig(std::uint64_t seed)
{
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    auto pick = [&](std::uint64_t lo, std::uint64_t hi) {
        return static_cast<std::uint32_t>(std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng));
    };
    std::vector<sysio::CoreSpec> cores;
    std::uint32_t id = 0;
    const auto procs = pick(1, 3);
    for (std::uint32_t i = 0; i < procs; ++i) {
        cores.push_back(processor(id++, pick(1, 4), pick(1, 4)));
    }
    const auto slots = pick(0, 2);
    for (std::uint32_t i = 0; i < slots; ++i) {
        cores.push_back(slot(id++, pick(10, 40), pick(1, 4), pick(1, 4)));
    }
    auto cfg = config(std::move(cores), 256, 4096);
    cfg.interleaving = true;
    cfg.ssnStreamSlots = pick(4, 64);
    return cfg;
}

} // namespace fixtures
