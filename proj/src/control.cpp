#include "redsharc/control.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

namespace redsharc::control {

using dfg::EdgeKind;
using dfg::PortRef;
using kernelapi::ImplKind;
using perfmon::EventKind;
using perfmon::resourceName;
using sysio::CoreKind;

namespace {

std::string kernelLabel(KernelId k)
{
    return k == kControlKernel ? std::string("control") : "kernel " + std::to_string(k.value);
}

std::string joinPorts(const std::vector<PortIndex>& ports)
{
    std::string out;
    for (std::size_t i = 0; i < ports.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        out += std::to_string(ports[i]);
    }
    return out;
}

bool activeState(KernelLifecycle s)
{
    return s == KernelLifecycle::CONFIGURED || s == KernelLifecycle::RUNNING || s == KernelLifecycle::FINISHED;
}

} // namespace

// ----------------------------------------------------------------------------
// Policies
// ----------------------------------------------------------------------------

bool PlacementView::compatible(KernelId k, const CoreAvailability& core) const
{
    auto it = needs.find(k);
    if (it == needs.end()) {
        return false;
    }
    return (it->second.kind == ImplKind::SW) == (core.kind == CoreKind::PROCESSOR);
}

bool PlacementView::fits(KernelId k, const CoreAvailability& core) const
{
    if (!compatible(k, core)) {
        return false;
    }
    const auto& n = needs.at(k);
    auto portsFit = [&](std::uint32_t need, std::uint32_t free) {
        if (need == 0) {
            return true;
        }
        return interleaving ? free >= 1 : free >= need;
    };
    if (core.kind == CoreKind::PROCESSOR) {
        return core.freeResidency >= 1 && portsFit(n.streams, core.freeStreamPorts);
    }
    return core.freeArea >= n.area && portsFit(n.streams, core.freeStreamPorts) && portsFit(n.blocks, core.freeBlockPorts);
}

SchedulingPolicy policyFifo()
{
    return {"fifo", [](const std::vector<KernelId>& ready, const std::vector<CoreAvailability>& cores,
                       const PlacementView& view) {
                std::vector<CoreAvailability> sorted = cores;
                std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
                std::set<CoreId> used;
                std::vector<Assignment> out;
                for (auto k : ready) {
                    for (const auto& c : sorted) {
                        if (used.count(c.id) == 0 && view.fits(k, c)) {
                            out.emplace_back(k, c.id);
                            used.insert(c.id);
                            break;
                        }
                    }
                }
                return out;
            }};
}

SchedulingPolicy policyStatic(std::map<KernelId, CoreId> placement)
{
    return {"static", [placement = std::move(placement)](const std::vector<KernelId>& ready,
                                                          const std::vector<CoreAvailability>& cores,
                                                          const PlacementView& view) {
                std::set<CoreId> used;
                std::vector<Assignment> out;
                for (auto k : ready) {
                    auto it = placement.find(k);
                    if (it == placement.end() || used.count(it->second) != 0) {
                        continue;
                    }
                    auto core = std::find_if(cores.begin(), cores.end(), [&](const auto& c) { return c.id == it->second; });
                    if (core != cores.end() && view.fits(k, *core)) {
                        out.emplace_back(k, core->id);
                        used.insert(core->id);
                    }
                }
                return out;
            }};
}

std::map<KernelId, CoreId> parseStaticPlacement(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("placement: ") + e.what());
    }
    std::map<KernelId, CoreId> out;
    try {
        if (!doc.is_object() || !doc.contains("placement") || !doc.at("placement").is_array()) {
            throw Error(ErrorCode::SemanticError, "placement: expected {\"placement\":[...]}");
        }
        for (const auto& entry : doc.at("placement")) {
            KernelId k{entry.at("kernel").get<std::uint32_t>()};
            CoreId c{entry.at("core").get<std::uint32_t>()};
            if (!out.emplace(k, c).second) {
                throw Error(ErrorCode::SemanticError, "placement: kernel " + std::to_string(k.value) + " listed twice");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SemanticError, std::string("placement: ") + e.what());
    }
    return out;
}

std::string_view outcomeName(Outcome o) noexcept
{
    switch (o) {
    case Outcome::COMPLETED: return "COMPLETED";
    case Outcome::DEADLOCK: return "DEADLOCK";
    case Outcome::ERROR: return "ERROR";
    }
    return "?";
}

// ----------------------------------------------------------------------------
// Ready set
// ----------------------------------------------------------------------------

std::vector<KernelId> computeReadySet(const dfg::Dfg& g, const std::map<KernelId, KernelLifecycle>& states)
{
    auto stateOf = [&](KernelId k) {
        auto it = states.find(k);
        return it == states.end() ? KernelLifecycle::PENDING : it->second;
    };
    std::set<KernelId> ready;
    for (const auto& [id, node] : g.nodes()) {
        auto s = stateOf(id);
        if (s != KernelLifecycle::PENDING && s != KernelLifecycle::READY) {
            continue;
        }
        bool blocksDone = std::all_of(node.inputs.begin(), node.inputs.end(), [&](const auto& b) {
            return !b || b->kind != EdgeKind::BLOCK || stateOf(b->producer) == KernelLifecycle::FINISHED;
        });
        if (blocksDone) {
            ready.insert(id);
        }
    }
    // Greatest fixed point: drop kernels whose stream producers can never co-launch.
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = ready.begin(); it != ready.end();) {
            const auto& node = g.node(*it);
            bool ok = std::all_of(node.inputs.begin(), node.inputs.end(), [&](const auto& b) {
                return !b || b->kind != EdgeKind::STREAM || activeState(stateOf(b->producer)) ||
                       ready.count(b->producer) != 0;
            });
            if (ok) {
                ++it;
            } else {
                it = ready.erase(it);
                changed = true;
            }
        }
    }
    return {ready.begin(), ready.end()};
}

// ----------------------------------------------------------------------------
// Control kernel
// ----------------------------------------------------------------------------

struct ControlKernel::Placement {
    CoreId core;
    std::vector<PortIndex> streamPorts;
    std::vector<PortIndex> blockPorts;
    /// Port carrying the interleaved channel, when one was bound.
    std::optional<PortIndex> sharedPort;
};

struct ControlKernel::KernelRuntime {
    KernelId id;
    const dfg::DfgNode* node = nullptr;
    const kernelapi::KernelImpl* impl = nullptr;
    LifecycleTracker lifecycle;
    std::optional<Placement> placement;
    kernelapi::TaskData data;
    std::vector<kernelapi::PortInfo> inputs;
    std::vector<kernelapi::PortInfo> outputs;
    std::unique_ptr<kernelapi::TaskContext> ctx;
    kernelapi::KernelTask task;
    bool halted = false;
};

ControlKernel::ControlKernel(sysio::System& sys, const dfg::Dfg& g, const kernelapi::KernelRegistry& registry,
                             SchedulingPolicy policy, RunOptions options)
    : sys_(sys), graph_(g), registry_(registry), policy_(std::move(policy)), options_(options),
      recorder_(options.mode, sys.config().costModel)
{
    view_.graph = &graph_;
    view_.interleaving = sys_.config().interleaving;
}

ControlKernel::~ControlKernel()
{
    // Destroy coroutine frames before the contexts they reference.
    for (auto& [_, rt] : kernels_) {
        rt->task = {};
    }
}

void ControlKernel::checkStarted() const
{
    if (!started_) {
        throw Error(ErrorCode::NotRunning, "the run has not been started");
    }
}

ControlKernel::KernelRuntime& ControlKernel::runtime(KernelId k)
{
    auto it = kernels_.find(k);
    if (it == kernels_.end()) {
        throw Error(ErrorCode::UnknownKernel, kernelLabel(k));
    }
    return *it->second;
}

const ControlKernel::KernelRuntime& ControlKernel::runtime(KernelId k) const
{
    auto it = kernels_.find(k);
    if (it == kernels_.end()) {
        throw Error(ErrorCode::UnknownKernel, kernelLabel(k));
    }
    return *it->second;
}

void ControlKernel::start()
{
    if (started_) {
        throw Error(ErrorCode::IllegalState, "the run has already been started");
    }
    auto diags = kernelapi::validateDfg(graph_, registry_);
    if (!diags.empty()) {
        std::string msg = "the dataflow graph is invalid:";
        for (const auto& d : diags) {
            msg += "\n  " + std::string(dfg::diagCodeName(d.code)) + ": " + d.message;
        }
        throw Error(ErrorCode::InvalidArgument, msg);
    }
    for (const auto& [id, node] : graph_.nodes()) {
        auto rt = std::make_unique<KernelRuntime>();
        rt->id = id;
        rt->node = &node;
        rt->impl = &registry_.at(node.implRef);
        PlacementNeeds needs;
        needs.kind = rt->impl->kind;
        needs.area = rt->impl->area;
        for (const auto& in : node.inputs) {
            (in->kind == EdgeKind::STREAM ? needs.streams : needs.blocks)++;
        }
        for (const auto& out : node.outputs) {
            (out->kind == EdgeKind::STREAM ? needs.streams : needs.blocks)++;
        }
        view_.needs[id] = needs;
        kernels_.emplace(id, std::move(rt));
    }

    // Reject kernels that no compatible core could ever hold.
    for (const auto& [id, needs] : view_.needs) {
        bool anyCompatible = false;
        bool areaFits = false;
        bool portsFit = false;
        for (const auto& spec : sys_.config().cores) {
            bool compat = (needs.kind == ImplKind::SW) == (spec.kind == CoreKind::PROCESSOR);
            if (!compat) {
                continue;
            }
            anyCompatible = true;
            if (spec.kind == CoreKind::FABRIC_SLOT && spec.area < needs.area) {
                continue;
            }
            areaFits = true;
            bool streamsOk = view_.interleaving || needs.streams <= spec.streamPortCount();
            bool blocksOk = spec.kind == CoreKind::PROCESSOR || view_.interleaving || needs.blocks <= spec.blockPorts;
            portsFit = portsFit || (streamsOk && blocksOk);
        }
        if (!anyCompatible) {
            continue; // surfaces as a starved kernel
        }
        if (!areaFits) {
            throw Error(ErrorCode::ConfigMismatch, kernelLabel(id) + " needs area " + std::to_string(needs.area) +
                                                       ", larger than every fabric slot");
        }
        if (!portsFit) {
            throw Error(ErrorCode::ConfigMismatch, kernelLabel(id) + " needs " + std::to_string(needs.streams) +
                                                  " stream and " + std::to_string(needs.blocks) +
                                                  " block ports and interleaving is disabled");
        }
    }
    started_ = true;
}

void ControlKernel::advance(KernelRuntime& rt, KernelLifecycle next)
{
    rt.lifecycle.advance(next);
}

KernelLifecycle ControlKernel::state(KernelId k) const
{
    return runtime(k).lifecycle.state();
}

std::map<KernelId, KernelLifecycle> ControlKernel::states() const
{
    std::map<KernelId, KernelLifecycle> out;
    for (const auto& [id, rt] : kernels_) {
        out[id] = rt->lifecycle.state();
    }
    return out;
}

bool ControlKernel::isFinished(KernelId k) const
{
    if (k == kControlKernel) {
        return true;
    }
    auto it = kernels_.find(k);
    return it != kernels_.end() && it->second->lifecycle.state() == KernelLifecycle::FINISHED;
}

std::optional<CoreId> ControlKernel::coreOf(KernelId k) const
{
    const auto& rt = runtime(k);
    if (!rt.placement) {
        return std::nullopt;
    }
    return rt.placement->core;
}

std::optional<StreamId> ControlKernel::streamOf(PortRef producerPort) const
{
    auto it = streams_.find(producerPort);
    return it == streams_.end() ? std::nullopt : std::optional<StreamId>(it->second);
}

std::optional<BlockId> ControlKernel::blockOf(PortRef producerPort) const
{
    auto it = blocks_.find(producerPort);
    return it == blocks_.end() ? std::nullopt : std::optional<BlockId>(it->second);
}

std::string ControlKernel::coreLabel(CoreId c) const
{
    return resourceName(c);
}

std::vector<CoreAvailability> ControlKernel::availability() const
{
    std::vector<CoreAvailability> out;
    for (const auto& core : sys_.cores()) {
        CoreAvailability a;
        a.id = core.id();
        a.kind = core.spec().kind;
        a.freeResidency = core.freeResidency();
        a.freeArea = core.spec().kind == CoreKind::FABRIC_SLOT ? core.spec().area - core.activeArea() : 0;
        a.freeStreamPorts = core.freeStreamPorts();
        a.freeBlockPorts = core.freeBlockPorts();
        out.push_back(a);
    }
    return out;
}

bool ControlKernel::resourcesAvailable(KernelId k) const
{
    const auto& node = graph_.node(k);
    std::size_t newStreams = 0;
    for (const auto& in : node.inputs) {
        if (in->kind == EdgeKind::STREAM && streams_.count({in->producer, in->producerPort}) == 0) {
            ++newStreams;
        }
    }
    auto pools = sys_.bsn().pools();
    for (PortIndex o = 0; o < node.numOutputs(); ++o) {
        const auto& decl = *node.outputs[o];
        if (decl.kind == EdgeKind::STREAM) {
            if (streams_.count({k, o}) == 0) {
                ++newStreams;
            }
            continue;
        }
        if (blocks_.count({k, o}) != 0) {
            continue;
        }
        auto words = bsn::footprintWords(decl.elemType, decl.length);
        bool preferOff = decl.memory == bsn::PlacementHint::PREFER_OFF_CHIP;
        auto& first = preferOff ? pools.offChipUsed : pools.onChipUsed;
        auto firstCap = preferOff ? pools.offChipCapacityWords : pools.onChipCapacityWords;
        auto& second = preferOff ? pools.onChipUsed : pools.offChipUsed;
        auto secondCap = preferOff ? pools.onChipCapacityWords : pools.offChipCapacityWords;
        if (firstCap - first >= words) {
            first += words;
        } else if (secondCap - second >= words) {
            second += words;
        } else {
            return false;
        }
    }
    return newStreams <= sys_.ssn().freeSlots();
}

void ControlKernel::refreshReadySet()
{
    checkStarted();
    for (auto k : computeReadySet(graph_, states())) {
        auto& rt = runtime(k);
        if (rt.lifecycle.state() == KernelLifecycle::PENDING) {
            advance(rt, KernelLifecycle::READY);
        }
    }
}

void ControlKernel::configureKernel(KernelId k, CoreId c)
{
    checkStarted();
    auto& rt = runtime(k);
    if (rt.lifecycle.state() != KernelLifecycle::READY) {
        throw Error(ErrorCode::IllegalState, kernelLabel(k) + " is " + std::string(lifecycleName(rt.lifecycle.state())) +
                                                 ", not READY");
    }
    auto& core = sys_.core(c);
    const auto& needs = view_.needs.at(k);
    if ((needs.kind == ImplKind::SW) != (core.spec().kind == CoreKind::PROCESSOR)) {
        throw Error(ErrorCode::IncompatibleCore, kernelLabel(k) + " (" + std::string(kernelapi::implKindName(needs.kind)) +
                                                     ") cannot run on " + std::string(sysio::coreKindName(core.spec().kind)) +
                                                     " core " + std::to_string(c.value));
    }

    // Physical ports: direct routes while they last, one shared channel for the rest.
    Placement placement;
    placement.core = c;
    std::size_t directStreams = needs.streams;
    {
        const auto free = core.freeStreamPorts();
        if (needs.streams > free) {
            if (!view_.interleaving || free == 0) {
                throw Error(ErrorCode::PortLimit, kernelLabel(k) + " needs " + std::to_string(needs.streams) +
                                                      " stream endpoints, core " + std::to_string(c.value) + " has " +
                                                      std::to_string(free) + " free");
            }
            directStreams = free - 1;
        }
        if (needs.blocks > core.freeBlockPorts() && (!view_.interleaving || core.freeBlockPorts() == 0)) {
            throw Error(ErrorCode::PortLimit, kernelLabel(k) + " needs " + std::to_string(needs.blocks) +
                                                  " block ports on core " + std::to_string(c.value));
        }
        if (directStreams < needs.streams) {
            placement.streamPorts = core.claimStreamPorts(static_cast<std::uint32_t>(directStreams + 1));
            placement.sharedPort = placement.streamPorts.back();
        } else {
            placement.streamPorts = core.claimStreamPorts(needs.streams);
        }
        if (core.spec().kind == CoreKind::FABRIC_SLOT) {
            placement.blockPorts = core.claimBlockPorts(std::min(needs.blocks, core.freeBlockPorts()));
        }
    }

    auto finished = [this](KernelId q) { return isFinished(q); };
    auto& ssn = sys_.ssn();
    auto& bsn = sys_.bsn();
    const auto& node = *rt.node;
    rt.data = {};
    rt.data.handle = k;
    rt.inputs.clear();
    rt.outputs.clear();

    auto streamFor = [&](PortRef producer, const dfg::OutputDecl& decl, ssn::Endpoint consumer) {
        auto it = streams_.find(producer);
        if (it != streams_.end()) {
            return it->second;
        }
        auto depth = decl.depth.value_or(sys_.config().defaultStreamDepth);
        auto s = ssn.createStream(decl.elemType, depth);
        ssn.routeStream(s, ssn::Endpoint{producer.kernel, producer.port, ssn::Direction::PRODUCER}, consumer, finished);
        streams_.emplace(producer, s);
        streamOwner_.emplace(s, producer);
        return s;
    };

    for (PortIndex p = 0; p < node.numInputs(); ++p) {
        const auto& b = *node.inputs[p];
        PortRef src{b.producer, b.producerPort};
        const auto& decl = *graph_.outputDecl(b.producer, b.producerPort);
        kernelapi::PortInfo info{b.kind, decl.elemType, decl.length, 0};
        if (b.kind == EdgeKind::STREAM) {
            info.slot = rt.data.streams.size();
            rt.data.streams.push_back(streamFor(src, decl, ssn::Endpoint{k, p, ssn::Direction::CONSUMER}));
        } else {
            auto it = blocks_.find(src);
            if (it == blocks_.end()) {
                throw Error(ErrorCode::IllegalState, kernelLabel(k) + " configured before block producer " +
                                                         kernelLabel(b.producer) + " allocated its block");
            }
            bsn.grantBlockAccess(it->second, k);
            info.slot = rt.data.blocks.size();
            rt.data.blocks.push_back(it->second);
        }
        rt.inputs.push_back(info);
    }
    for (PortIndex o = 0; o < node.numOutputs(); ++o) {
        const auto& decl = *node.outputs[o];
        PortRef ref{k, o};
        auto consumers = graph_.consumersOf(k, o);
        kernelapi::PortInfo info{decl.kind, decl.elemType, decl.length, 0};
        if (decl.kind == EdgeKind::STREAM) {
            ssn::Endpoint consumer{kControlKernel, 0, ssn::Direction::CONSUMER};
            if (!consumers.empty()) {
                consumer = {consumers.front().kernel, consumers.front().port, ssn::Direction::CONSUMER};
            }
            auto s = streamFor(ref, decl, consumer);
            if (consumers.empty()) {
                terminalStreams_.insert(s);
            }
            info.slot = rt.data.streams.size();
            rt.data.streams.push_back(s);
        } else {
            auto it = blocks_.find(ref);
            BlockId blk;
            if (it == blocks_.end()) {
                blk = bsn.allocBlock(decl.elemType, decl.length, decl.memory);
                blocks_.emplace(ref, blk);
            } else {
                blk = it->second;
            }
            bsn.grantBlockAccess(blk, k);
            if (consumers.empty()) {
                bsn.grantBlockAccess(blk, kControlKernel);
            }
            info.slot = rt.data.blocks.size();
            rt.data.blocks.push_back(blk);
        }
        rt.outputs.push_back(info);
    }

    if (placement.sharedPort) {
        std::vector<StreamId> shared(rt.data.streams.begin() + static_cast<std::ptrdiff_t>(directStreams),
                                     rt.data.streams.end());
        ssn.bindLogicalChannels(c, *placement.sharedPort, shared, k);
    }

    std::string detail = "streamPorts=" + joinPorts(placement.streamPorts);
    if (placement.sharedPort) {
        detail += " shared=" + std::to_string(*placement.sharedPort) + " logical=" +
                  std::to_string(needs.streams - directStreams);
    }
    detail += " blockPorts=" + joinPorts(placement.blockPorts);
    recorder_.record(EventKind::CONFIGURE, k, coreLabel(c), detail);

    rt.placement = std::move(placement);
    advance(rt, KernelLifecycle::CONFIGURED);
    createTask(rt);
}

void ControlKernel::createTask(KernelRuntime& rt)
{
    rt.task = {};
    rt.ctx = std::make_unique<kernelapi::TaskContext>(rt.data, rt.inputs, rt.outputs,
                                                      static_cast<kernelapi::KernelServices&>(*this));
    rt.task = rt.impl->body(*rt.ctx);
    if (!rt.task.valid()) {
        throw Error(ErrorCode::IllegalState, "implementation '" + rt.impl->name + "' returned no task");
    }
}

void ControlKernel::placeOnCore(KernelRuntime& rt, sysio::CoreState& core)
{
    const auto& needs = view_.needs.at(rt.id);
    std::string detail = "kind=" + std::string(kernelapi::implKindName(needs.kind)) +
                         " area=" + std::to_string(core.spec().kind == CoreKind::FABRIC_SLOT ? needs.area : 0) +
                         " streamPorts=" + std::to_string(rt.placement->streamPorts.size()) +
                         " blockPorts=" + std::to_string(rt.placement->blockPorts.size());
    auto& residents = core.residents();
    if (core.spec().kind == CoreKind::PROCESSOR) {
        if (core.freeResidency() == 0) {
            throw Error(ErrorCode::NoCapacity, "core " + std::to_string(core.id().value) + " already hosts " +
                                                   std::to_string(core.spec().maxResident) + " kernels");
        }
        residents.push_back({rt.id, rt.impl->name, 0, false});
        recorder_.record(EventKind::LAUNCH, rt.id, coreLabel(core.id()), detail);
        return;
    }

    if (core.spec().area - core.activeArea() < needs.area) {
        throw Error(ErrorCode::NoCapacity, "slot " + std::to_string(core.id().value) + " has " +
                                               std::to_string(core.spec().area - core.activeArea()) +
                                               " free area, " + kernelLabel(rt.id) + " needs " +
                                               std::to_string(needs.area));
    }
    // A finished kernel with the same implementation already configured in the
    // fabric is reused without reconfiguration.
    auto reuse = std::find_if(residents.begin(), residents.end(),
                              [&](const sysio::Resident& r) { return r.finished && r.impl == rt.impl->name; });
    if (reuse != residents.end()) {
        detail += " reuse=" + std::to_string(reuse->kernel.value);
        *reuse = {rt.id, rt.impl->name, needs.area, false};
        recorder_.record(EventKind::LAUNCH, rt.id, coreLabel(core.id()), detail);
        return;
    }
    std::vector<std::string> evicted;
    while (core.spec().area - core.occupiedArea() < needs.area) {
        auto victim = std::find_if(residents.begin(), residents.end(), [](const sysio::Resident& r) { return r.finished; });
        evicted.push_back(std::to_string(victim->kernel.value));
        residents.erase(victim);
    }
    std::string evict = "evict=";
    for (std::size_t i = 0; i < evicted.size(); ++i) {
        evict += (i ? "," : "") + evicted[i];
    }
    recorder_.record(EventKind::RECONFIG, rt.id, coreLabel(core.id()), evict);
    residents.push_back({rt.id, rt.impl->name, needs.area, false});
    recorder_.record(EventKind::LAUNCH, rt.id, coreLabel(core.id()), detail);
}

void ControlKernel::launchKernel(KernelId k, CoreId c)
{
    checkStarted();
    auto& rt = runtime(k);
    if (rt.lifecycle.state() != KernelLifecycle::CONFIGURED) {
        throw Error(ErrorCode::IllegalState, kernelLabel(k) + " is " + std::string(lifecycleName(rt.lifecycle.state())) +
                                                 ", not CONFIGURED");
    }
    auto& core = sys_.core(c);
    const auto& needs = view_.needs.at(k);
    if ((needs.kind == ImplKind::SW) != (core.spec().kind == CoreKind::PROCESSOR)) {
        throw Error(ErrorCode::IncompatibleCore, kernelLabel(k) + " cannot run on core " + std::to_string(c.value));
    }
    if (rt.placement->core != c) {
        throw Error(ErrorCode::InvalidArgument, kernelLabel(k) + " was configured for core " +
                                                    std::to_string(rt.placement->core.value));
    }
    if (core.resident(k) != nullptr) {
        throw Error(ErrorCode::IllegalState, kernelLabel(k) + " is already placed");
    }
    placeOnCore(rt, core);
    if (needs.kind == ImplKind::SW || options_.autoStartHw) {
        startTask(rt);
    }
}

void ControlKernel::startTask(KernelRuntime& rt)
{
    advance(rt, KernelLifecycle::RUNNING);
    rt.halted = false;
}

bool ControlKernel::schedulePass()
{
    refreshReadySet();
    std::vector<KernelId> ready;
    for (auto k : computeReadySet(graph_, states())) {
        if (runtime(k).lifecycle.state() == KernelLifecycle::READY) {
            ready.push_back(k);
        }
    }
    if (ready.empty()) {
        return false;
    }
    auto cores = availability();
    auto assignments = policy_.decide(ready, cores, view_);
    bool launched = false;
    std::set<CoreId> used;
    for (const auto& [k, c] : assignments) {
        auto core = std::find_if(cores.begin(), cores.end(), [&](const auto& a) { return a.id == c; });
        if (core == cores.end() || !used.insert(c).second || !std::binary_search(ready.begin(), ready.end(), k) ||
            runtime(k).lifecycle.state() != KernelLifecycle::READY || !view_.fits(k, *core)) {
            continue;
        }
        if (!resourcesAvailable(k)) {
            continue;
        }
        configureKernel(k, c);
        launchKernel(k, c);
        launched = true;
    }
    return launched;
}

bool ControlKernel::runnable(const KernelRuntime& rt) const
{
    if (rt.lifecycle.state() != KernelLifecycle::RUNNING || rt.halted || !rt.task.valid() || rt.task.done()) {
        return false;
    }
    const auto& w = rt.ctx->wait();
    switch (w.kind) {
    case kernelapi::WaitCondition::Kind::NONE:
    case kernelapi::WaitCondition::Kind::YIELD:
        return true;
    case kernelapi::WaitCondition::Kind::DATA:
        return sys_.ssn().canPop(w.stream);
    case kernelapi::WaitCondition::Kind::SPACE:
        return sys_.ssn().canPush(w.stream);
    }
    return false;
}

bool ControlKernel::dispatchPass()
{
    bool progress = false;
    for (auto& [id, rtp] : kernels_) {
        auto& rt = *rtp;
        if (!runnable(rt)) {
            continue;
        }
        progress = true;
        rt.task.resume();
        if (outcome_) {
            return true;
        }
        if (auto err = rt.task.error()) {
            try {
                std::rethrow_exception(err);
            } catch (const Error& e) {
                fail(e.code(), kernelLabel(id) + ": " + e.what());
            } catch (const std::exception& e) {
                fail(ErrorCode::IllegalState, kernelLabel(id) + ": " + e.what());
            }
            return true;
        }
        if (rt.task.done()) {
            if (!rt.ctx->finished()) {
                fail(ErrorCode::IllegalState, kernelLabel(id) + " returned without signalling completion");
                return true;
            }
        } else if (rt.lifecycle.state() == KernelLifecycle::RUNNING) {
            auto kind = rt.ctx->wait().kind;
            if (kind == kernelapi::WaitCondition::Kind::YIELD ||
                (kind != kernelapi::WaitCondition::Kind::NONE && rt.impl->kind == ImplKind::SW)) {
                recorder_.record(EventKind::CONTEXT_SWITCH, id, coreLabel(rt.placement->core));
            }
        }
        sys_.ssn().pump();
        drainTerminals();
    }
    return progress;
}

void ControlKernel::drainTerminals()
{
    auto& ssn = sys_.ssn();
    for (auto s : terminalStreams_) {
        if (ssn.descriptor(s).state == ssn::StreamState::FREED) {
            continue;
        }
        auto& sink = outputs_[streamOwner_.at(s)];
        while (auto e = ssn.tryPop(s, kControlKernel)) {
            sink.push_back(*e);
            recorder_.record(EventKind::POP, std::nullopt, resourceName(s));
        }
    }
}

void ControlKernel::kernelFinished(KernelId k)
{
    auto& rt = runtime(k);
    advance(rt, KernelLifecycle::FINISHED);
    auto& ssn = sys_.ssn();
    ssn.pump();
    drainTerminals();

    // Terminal blocks are handed to the control kernel before release.
    for (PortIndex o = 0; o < rt.node->numOutputs(); ++o) {
        if (rt.node->outputs[o]->kind == EdgeKind::BLOCK && graph_.consumersOf(k, o).empty()) {
            outputs_[{k, o}] = sys_.bsn().descriptor(blocks_.at({k, o})).storage;
        }
    }

    auto& core = sys_.core(rt.placement->core);
    core.releaseStreamPorts(rt.placement->streamPorts);
    core.releaseBlockPorts(rt.placement->blockPorts);
    if (rt.placement->sharedPort) {
        ssn.unbindChannel(core.id(), *rt.placement->sharedPort);
    }
    auto& residents = core.residents();
    if (core.spec().kind == CoreKind::PROCESSOR) {
        std::erase_if(residents, [&](const sysio::Resident& r) { return r.kernel == k; });
    } else if (auto* r = core.resident(k)) {
        r->finished = true;
    }
    recorder_.record(EventKind::FINISH, k, coreLabel(core.id()));
    freeIncident(k);
}

void ControlKernel::freeIncident(KernelId k)
{
    auto finished = [this](KernelId q) { return isFinished(q); };
    const auto& node = graph_.node(k);
    std::vector<PortRef> incident;
    for (const auto& in : node.inputs) {
        incident.push_back({in->producer, in->producerPort});
    }
    for (PortIndex o = 0; o < node.numOutputs(); ++o) {
        incident.push_back({k, o});
    }
    for (const auto& ref : incident) {
        bool endpointsDone = isFinished(ref.kernel);
        for (const auto& c : graph_.consumersOf(ref.kernel, ref.port)) {
            endpointsDone = endpointsDone && isFinished(c.kernel);
        }
        if (!endpointsDone) {
            continue;
        }
        if (auto s = streams_.find(ref); s != streams_.end()) {
            if (sys_.ssn().descriptor(s->second).state != ssn::StreamState::FREED) {
                sys_.ssn().freeStream(s->second, finished);
                recorder_.record(EventKind::FREE, std::nullopt, resourceName(s->second));
            }
        }
        if (auto b = blocks_.find(ref); b != blocks_.end()) {
            if (sys_.bsn().descriptor(b->second).state != bsn::BlockState::FREED) {
                sys_.bsn().freeBlock(b->second, finished);
                recorder_.record(EventKind::FREE, std::nullopt, resourceName(b->second));
            }
        }
    }
}

// KernelServices ---------------------------------------------------------------

bool ControlKernel::tryPush(KernelId k, StreamId s, const Element& e)
{
    if (!sys_.ssn().tryPush(s, k, e)) {
        return false;
    }
    recorder_.record(EventKind::PUSH, k, resourceName(s));
    if (options_.captureStreams) {
        captured_[streamOwner_.at(s)].push_back(e);
    }
    return true;
}

std::optional<Element> ControlKernel::tryPop(KernelId k, StreamId s)
{
    auto e = sys_.ssn().tryPop(s, k);
    if (e) {
        recorder_.record(EventKind::POP, k, resourceName(s));
    }
    return e;
}

std::optional<Element> ControlKernel::tryPeek(KernelId k, StreamId s)
{
    auto e = sys_.ssn().tryPeek(s, k);
    if (e) {
        recorder_.record(EventKind::PEEK, k, resourceName(s));
    }
    return e;
}

void ControlKernel::stalled(KernelId k, StreamId s)
{
    recorder_.record(EventKind::STALL, k, resourceName(s));
}

Element ControlKernel::blockRead(KernelId k, BlockId b, std::size_t index)
{
    auto e = sys_.bsn().blockRead(b, k, index);
    recorder_.record(EventKind::BLOCK_READ, k, resourceName(b), {}, sys_.bsn().descriptor(b).memClass);
    return e;
}

void ControlKernel::blockWrite(KernelId k, BlockId b, std::size_t index, const Element& e)
{
    sys_.bsn().blockWrite(b, k, index, e);
    recorder_.record(EventKind::BLOCK_WRITE, k, resourceName(b), {}, sys_.bsn().descriptor(b).memClass);
}

// Passes -----------------------------------------------------------------------

void ControlKernel::fail(ErrorCode code, const std::string& message)
{
    if (outcome_) {
        return;
    }
    errorCode_ = code;
    diagnostics_.push_back(message);
    outcome_ = Outcome::ERROR;
}

void ControlKernel::finalize(Outcome o)
{
    if (outcome_) {
        return;
    }
    if (o == Outcome::DEADLOCK) {
        auto blocked = describeBlocked();
        std::istringstream lines(blocked);
        for (std::string line; std::getline(lines, line);) {
            diagnostics_.push_back(line);
        }
    }
    outcome_ = o;
}

std::string ControlKernel::describeBlocked() const
{
    std::ostringstream os;
    for (const auto& [id, rt] : kernels_) {
        auto s = rt->lifecycle.state();
        if (s == KernelLifecycle::FINISHED) {
            continue;
        }
        os << kernelLabel(id) << ' ';
        if (s == KernelLifecycle::PENDING || s == KernelLifecycle::READY) {
            bool compatible = false;
            for (const auto& c : availability()) {
                compatible = compatible || view_.compatible(id, c);
            }
            os << "starved: never launched (" << lifecycleName(s) << ")";
            if (!compatible) {
                os << ", no compatible core";
            }
        } else if (s == KernelLifecycle::CONFIGURED) {
            os << "placed but not started";
        } else if (rt->halted) {
            os << "halted by STOP";
        } else {
            const auto& w = rt->ctx->wait();
            if (w.kind == kernelapi::WaitCondition::Kind::DATA) {
                os << "blocked: waiting for data on stream " << w.stream.value;
            } else if (w.kind == kernelapi::WaitCondition::Kind::SPACE) {
                os << "blocked: waiting for space on stream " << w.stream.value;
            } else {
                os << "runnable";
            }
        }
        os << '\n';
    }
    return os.str();
}

PassResult ControlKernel::stepLocked()
{
    checkStarted();
    if (outcome_) {
        return *outcome_ == Outcome::COMPLETED ? PassResult::COMPLETED : PassResult::FAILED;
    }
    bool progress = false;
    try {
        if (options_.autoSchedule) {
            progress = schedulePass();
        }
    } catch (const Error& e) {
        fail(e.code(), e.what());
    }
    if (!outcome_) {
        progress = dispatchPass() || progress;
    }
    if (outcome_) {
        return PassResult::FAILED;
    }
    bool allFinished = std::all_of(kernels_.begin(), kernels_.end(), [](const auto& kv) {
        return kv.second->lifecycle.state() == KernelLifecycle::FINISHED;
    });
    if (allFinished) {
        finalize(Outcome::COMPLETED);
        return PassResult::COMPLETED;
    }
    return progress ? PassResult::PROGRESSED : PassResult::STALLED;
}

PassResult ControlKernel::step()
{
    {
        std::unique_lock lk(mu_);
        if (paused_) {
            return PassResult::PAUSED;
        }
        inPass_ = true;
    }
    PassResult r;
    try {
        r = stepLocked();
    } catch (...) {
        std::lock_guard lk(mu_);
        inPass_ = false;
        cv_.notify_all();
        throw;
    }
    std::lock_guard lk(mu_);
    inPass_ = false;
    cv_.notify_all();
    return r;
}

RunReport ControlKernel::run()
{
    if (!started_) {
        start();
    }
    while (!outcome_) {
        {
            std::unique_lock lk(mu_);
            cv_.wait(lk, [&] { return !paused_ || grantedPasses_ > 0 || aborted_; });
            if (aborted_) {
                fail(ErrorCode::IllegalState, "run aborted");
                break;
            }
            if (paused_) {
                --grantedPasses_;
            }
            inPass_ = true;
        }
        auto r = stepLocked();
        {
            std::lock_guard lk(mu_);
            if (r == PassResult::STALLED) {
                finalize(Outcome::DEADLOCK);
            }
            if (outcome_) {
                grantedPasses_ = 0;
            }
            inPass_ = false;
            cv_.notify_all();
        }
    }
    std::lock_guard lk(mu_);
    cv_.notify_all();
    return report();
}

bool ControlKernel::detectDeadlock() const
{
    if (!started_) {
        return false;
    }
    if (outcome_) {
        return *outcome_ == Outcome::DEADLOCK;
    }
    bool allFinished = true;
    for (const auto& [id, rt] : kernels_) {
        if (rt->lifecycle.state() != KernelLifecycle::FINISHED) {
            allFinished = false;
        }
        if (runnable(*rt)) {
            return false;
        }
    }
    if (allFinished) {
        return false;
    }
    if (!options_.autoSchedule) {
        return true;
    }
    std::vector<KernelId> ready;
    for (auto k : computeReadySet(graph_, states())) {
        auto s = runtime(k).lifecycle.state();
        if (s == KernelLifecycle::PENDING || s == KernelLifecycle::READY) {
            ready.push_back(k);
        }
    }
    if (ready.empty()) {
        return true;
    }
    auto cores = availability();
    for (const auto& [k, c] : policy_.decide(ready, cores, view_)) {
        auto core = std::find_if(cores.begin(), cores.end(), [&](const auto& a) { return a.id == c; });
        if (core != cores.end() && view_.fits(k, *core) && resourcesAvailable(k)) {
            return false;
        }
    }
    return true;
}

RunReport ControlKernel::report() const
{
    RunReport r;
    r.outcome = outcome_.value_or(Outcome::ERROR);
    r.errorCode = errorCode_;
    r.diagnostics = diagnostics_;
    if (!outcome_) {
        r.diagnostics.push_back("run still in progress");
    }
    for (const auto& [id, rt] : kernels_) {
        r.finalStates[id] = rt->lifecycle.state();
        r.lifecycleHistory[id] = rt->lifecycle.history();
    }
    r.counters = recorder_.snapshotCounters();
    r.trace = recorder_.trace();
    r.outputs = outputs_;
    r.captured = captured_;
    r.streamsCreated = sys_.ssn().createdCount();
    r.streamsFreed = sys_.ssn().freedCount();
    r.blocksAllocated = sys_.bsn().allocatedCount();
    r.blocksFreed = sys_.bsn().freedCount();
    r.poolsAtEnd = sys_.bsn().pools();
    return r;
}

// Hardware control -----------------------------------------------------------------

void ControlKernel::hwWriteControl(KernelId k, kernelapi::ControlRegister reg)
{
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return !inPass_; });
    checkStarted();
    auto& rt = runtime(k);
    if (rt.impl->kind != ImplKind::HW || !rt.placement || sys_.core(rt.placement->core).resident(k) == nullptr) {
        throw Error(ErrorCode::NotResident, kernelLabel(k) + " is not resident on a fabric slot");
    }
    auto s = rt.lifecycle.state();
    switch (reg) {
    case kernelapi::ControlRegister::START:
        if (s == KernelLifecycle::CONFIGURED) {
            startTask(rt);
        } else if (s == KernelLifecycle::RUNNING) {
            rt.halted = false;
        } else {
            throw Error(ErrorCode::IllegalState, kernelLabel(k) + " has finished");
        }
        break;
    case kernelapi::ControlRegister::STOP:
        if (s == KernelLifecycle::RUNNING) {
            rt.halted = true;
        }
        break;
    case kernelapi::ControlRegister::RESET:
        if (s == KernelLifecycle::FINISHED) {
            throw Error(ErrorCode::IllegalState, kernelLabel(k) + " has finished");
        }
        createTask(rt);
        rt.halted = s == KernelLifecycle::RUNNING;
        break;
    }
}

std::uint32_t ControlKernel::hwReadStatus(KernelId k) const
{
    checkStarted();
    const auto& rt = runtime(k);
    if (rt.impl->kind != ImplKind::HW || !rt.placement || sys_.core(rt.placement->core).resident(k) == nullptr) {
        throw Error(ErrorCode::NotResident, kernelLabel(k) + " is not resident on a fabric slot");
    }
    return kernelapi::encodeStatus(rt.lifecycle.state(), rt.halted, rt.ctx ? rt.ctx->debugValue() : 0);
}

// Debugging ---------------------------------------------------------------------------

void ControlKernel::pauseAll()
{
    std::unique_lock lk(mu_);
    if (!started_ || outcome_) {
        throw Error(ErrorCode::NotRunning, "no run in progress");
    }
    paused_ = true;
    cv_.wait(lk, [&] { return !inPass_; });
}

void ControlKernel::resume()
{
    std::lock_guard lk(mu_);
    if (!started_ || !paused_) {
        throw Error(ErrorCode::NotRunning, "the run is not paused");
    }
    paused_ = false;
    cv_.notify_all();
}

void ControlKernel::advancePaused(std::size_t passes)
{
    std::unique_lock lk(mu_);
    if (!started_ || outcome_) {
        throw Error(ErrorCode::NotRunning, "no run in progress");
    }
    if (!paused_) {
        throw Error(ErrorCode::NotPaused, "advancing requires a paused run");
    }
    grantedPasses_ = passes;
    cv_.notify_all();
    cv_.wait(lk, [&] { return (grantedPasses_ == 0 && !inPass_) || outcome_.has_value() || aborted_; });
}

bool ControlKernel::paused() const
{
    std::lock_guard lk(mu_);
    return paused_;
}

void ControlKernel::abort()
{
    std::lock_guard lk(mu_);
    aborted_ = true;
    cv_.notify_all();
}

std::vector<Element> ControlKernel::debugPeekStream(StreamId s) const
{
    std::lock_guard lk(mu_);
    if (!paused_) {
        throw Error(ErrorCode::NotPaused, "pause the run before inspecting streams");
    }
    return sys_.ssn().contents(s);
}

Element ControlKernel::debugReadBlock(BlockId b, std::size_t index) const
{
    std::lock_guard lk(mu_);
    if (!paused_) {
        throw Error(ErrorCode::NotPaused, "pause the run before inspecting blocks");
    }
    return sys_.bsn().debugRead(b, index);
}

void ControlKernel::debugWriteBlock(BlockId b, std::size_t index, const Element& e)
{
    std::lock_guard lk(mu_);
    if (!paused_) {
        throw Error(ErrorCode::NotPaused, "pause the run before modifying blocks");
    }
    sys_.bsn().debugWrite(b, index, e);
}

std::string ControlKernel::debugStatus() const
{
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return !inPass_; });
    std::ostringstream os;
    os << "run " << (outcome_ ? outcomeName(*outcome_) : (paused_ ? "PAUSED" : "RUNNING")) << " time=" << recorder_.now()
       << '\n';
    for (const auto& [id, rt] : kernels_) {
        os << "kernel " << id.value << ' ' << rt->impl->name << ' ' << lifecycleName(rt->lifecycle.state());
        if (rt->placement) {
            os << " core=" << rt->placement->core.value;
        }
        if (rt->halted) {
            os << " halted";
        }
        os << '\n';
    }
    for (auto s : sys_.ssn().streams()) {
        os << sys_.ssn().render(s) << '\n';
    }
    for (auto b : sys_.bsn().blocks()) {
        if (sys_.bsn().descriptor(b).state != bsn::BlockState::FREED) {
            os << sys_.bsn().render(b) << '\n';
        }
    }
    return os.str();
}

RunReport runSystem(sysio::System& sys, const dfg::Dfg& g, const kernelapi::KernelRegistry& registry,
                    const SchedulingPolicy& policy, RunOptions options)
{
    ControlKernel ck(sys, g, registry, policy, options);
    ck.start();
    return ck.run();
}

} // namespace redsharc::control
