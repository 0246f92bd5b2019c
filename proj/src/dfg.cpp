#include "redsharc/dfg.hpp"

#include <set>

namespace redsharc::dfg {

namespace {

std::string kernelLabel(KernelId k)
{
    return "kernel " + std::to_string(k.value);
}

} // namespace

std::string_view edgeKindName(EdgeKind k) noexcept
{
    return k == EdgeKind::STREAM ? "stream" : "block";
}

std::string_view diagCodeName(DiagCode c) noexcept
{
    switch (c) {
    case DiagCode::UNBOUND_PORT: return "UNBOUND_PORT";
    case DiagCode::UNKNOWN_PRODUCER: return "UNKNOWN_PRODUCER";
    case DiagCode::PORT_OUT_OF_RANGE: return "PORT_OUT_OF_RANGE";
    case DiagCode::KIND_MISMATCH: return "KIND_MISMATCH";
    case DiagCode::TYPE_MISMATCH: return "TYPE_MISMATCH";
    case DiagCode::STREAM_FANOUT: return "STREAM_FANOUT";
    case DiagCode::BLOCK_CYCLE: return "BLOCK_CYCLE";
    case DiagCode::UNRESOLVED_IMPL: return "UNRESOLVED_IMPL";
    }
    return "?";
}

DfgNode& Dfg::mutableNode(KernelId k)
{
    auto it = nodes_.find(k);
    if (it == nodes_.end()) {
        throw Error(ErrorCode::UnknownKernel, kernelLabel(k) + " is not in the graph");
    }
    return it->second;
}

const DfgNode& Dfg::node(KernelId k) const
{
    auto it = nodes_.find(k);
    if (it == nodes_.end()) {
        throw Error(ErrorCode::UnknownKernel, kernelLabel(k) + " is not in the graph");
    }
    return it->second;
}

std::vector<KernelId> Dfg::kernels() const
{
    std::vector<KernelId> ids;
    for (const auto& [id, _] : nodes_) {
        ids.push_back(id);
    }
    return ids;
}

void Dfg::initKernel(KernelId k, std::string implRef, std::size_t numInputs, std::size_t numOutputs)
{
    if (k == kControlKernel) {
        throw Error(ErrorCode::InvalidArgument, "kernel id is reserved for the control kernel");
    }
    if (nodes_.count(k) != 0) {
        throw Error(ErrorCode::DuplicateKernel, kernelLabel(k) + " already exists");
    }
    DfgNode n;
    n.kernel = k;
    n.implRef = std::move(implRef);
    n.inputs.resize(numInputs);
    n.outputs.resize(numOutputs);
    nodes_.emplace(k, std::move(n));
}

void Dfg::addDependency(EdgeKind kind, KernelId consumer, PortIndex consumerPort, KernelId producer,
                        PortIndex producerPort, std::optional<ElementType> expectedType)
{
    auto& c = mutableNode(consumer);
    const auto& p = node(producer);
    if (consumerPort >= c.numInputs()) {
        throw Error(ErrorCode::PortOutOfRange, kernelLabel(consumer) + " has " + std::to_string(c.numInputs()) +
                                                   " inputs, not port " + std::to_string(consumerPort));
    }
    if (producerPort >= p.numOutputs()) {
        throw Error(ErrorCode::PortOutOfRange, kernelLabel(producer) + " has " + std::to_string(p.numOutputs()) +
                                                   " outputs, not port " + std::to_string(producerPort));
    }
    auto& slot = c.inputs[consumerPort];
    if (slot) {
        throw Error(ErrorCode::Rebinding, kernelLabel(consumer) + " input " + std::to_string(consumerPort) +
                                              " is already bound");
    }
    slot = InputBinding{kind, producer, producerPort, expectedType};
}

void Dfg::addStreamDependency(KernelId consumer, PortIndex consumerPort, KernelId producer, PortIndex producerPort,
                              std::optional<ElementType> expectedType)
{
    addDependency(EdgeKind::STREAM, consumer, consumerPort, producer, producerPort, expectedType);
}

void Dfg::addBlockDependency(KernelId consumer, PortIndex consumerPort, KernelId producer, PortIndex producerPort,
                             std::optional<ElementType> expectedType)
{
    addDependency(EdgeKind::BLOCK, consumer, consumerPort, producer, producerPort, expectedType);
}

void Dfg::addOutput(EdgeKind kind, KernelId k, PortIndex port, OutputDecl decl)
{
    auto& n = mutableNode(k);
    if (port >= n.numOutputs()) {
        throw Error(ErrorCode::PortOutOfRange, kernelLabel(k) + " has " + std::to_string(n.numOutputs()) +
                                                   " outputs, not port " + std::to_string(port));
    }
    if (decl.length == 0) {
        throw Error(ErrorCode::InvalidArgument, "output length must be at least 1");
    }
    if (decl.depth && *decl.depth == 0) {
        throw Error(ErrorCode::InvalidArgument, "stream depth must be at least 1");
    }
    auto& slot = n.outputs[port];
    if (slot) {
        throw Error(ErrorCode::Rebinding, kernelLabel(k) + " output " + std::to_string(port) + " is already declared");
    }
    decl.kind = kind;
    slot = decl;
}

void Dfg::addOutputStream(KernelId k, PortIndex port, ElementType t, std::size_t length,
                          std::optional<std::size_t> depth)
{
    addOutput(EdgeKind::STREAM, k, port, OutputDecl{EdgeKind::STREAM, t, length, depth, bsn::PlacementHint::AUTO});
}

void Dfg::addOutputBlock(KernelId k, PortIndex port, ElementType t, std::size_t length, bsn::PlacementHint memory)
{
    addOutput(EdgeKind::BLOCK, k, port, OutputDecl{EdgeKind::BLOCK, t, length, std::nullopt, memory});
}

std::vector<PortRef> Dfg::consumersOf(KernelId producer, PortIndex port) const
{
    std::vector<PortRef> out;
    for (const auto& [id, n] : nodes_) {
        for (PortIndex i = 0; i < n.numInputs(); ++i) {
            const auto& b = n.inputs[i];
            if (b && b->producer == producer && b->producerPort == port) {
                out.push_back({id, i});
            }
        }
    }
    return out;
}

const OutputDecl* Dfg::outputDecl(KernelId producer, PortIndex port) const
{
    auto it = nodes_.find(producer);
    if (it == nodes_.end() || port >= it->second.numOutputs() || !it->second.outputs[port]) {
        return nullptr;
    }
    return &*it->second.outputs[port];
}

std::vector<Diagnostic> Dfg::validate(const ImplResolver& resolves) const
{
    std::vector<Diagnostic> diags;
    // producer -> consumers over well-formed edges, used for cycle search
    std::map<KernelId, std::set<KernelId>> succ;
    std::vector<std::pair<KernelId, KernelId>> blockEdges;

    for (const auto& [id, n] : nodes_) {
        if (resolves && !resolves(n.implRef)) {
            diags.push_back({DiagCode::UNRESOLVED_IMPL, id, kernelLabel(id) + " uses unknown implementation '" + n.implRef + "'"});
        }
        for (PortIndex o = 0; o < n.numOutputs(); ++o) {
            if (!n.outputs[o]) {
                diags.push_back({DiagCode::UNBOUND_PORT, id, kernelLabel(id) + " output " + std::to_string(o) + " is not declared"});
                continue;
            }
            if (n.outputs[o]->kind == EdgeKind::STREAM) {
                auto consumers = consumersOf(id, o);
                if (consumers.size() > 1) {
                    diags.push_back({DiagCode::STREAM_FANOUT, id, kernelLabel(id) + " stream output " + std::to_string(o) +
                                                                      " has " + std::to_string(consumers.size()) + " consumers"});
                }
            }
        }
        for (PortIndex i = 0; i < n.numInputs(); ++i) {
            const auto& b = n.inputs[i];
            std::string where = kernelLabel(id) + " input " + std::to_string(i);
            if (!b) {
                diags.push_back({DiagCode::UNBOUND_PORT, id, where + " is not bound"});
                continue;
            }
            auto pit = nodes_.find(b->producer);
            if (pit == nodes_.end()) {
                diags.push_back({DiagCode::UNKNOWN_PRODUCER, id, where + " refers to missing " + kernelLabel(b->producer)});
                continue;
            }
            if (b->producerPort >= pit->second.numOutputs()) {
                diags.push_back({DiagCode::PORT_OUT_OF_RANGE, id, where + " refers to missing output " +
                                                                     std::to_string(b->producerPort) + " of " +
                                                                     kernelLabel(b->producer)});
                continue;
            }
            const auto& decl = pit->second.outputs[b->producerPort];
            if (!decl) {
                // reported once on the producer side
                continue;
            }
            if (decl->kind != b->kind) {
                diags.push_back({DiagCode::KIND_MISMATCH, id, where + " expects a " + std::string(edgeKindName(b->kind)) +
                                                                 " but " + kernelLabel(b->producer) + " output " +
                                                                 std::to_string(b->producerPort) + " is a " +
                                                                 std::string(edgeKindName(decl->kind))});
                continue;
            }
            if (b->expectedType && *b->expectedType != decl->elemType) {
                diags.push_back({DiagCode::TYPE_MISMATCH, id, where + " expects " +
                                                                 std::string(elementTypeName(*b->expectedType)) +
                                                                 " but the producer declares " +
                                                                 std::string(elementTypeName(decl->elemType))});
                continue;
            }
            succ[b->producer].insert(id);
            if (b->kind == EdgeKind::BLOCK) {
                blockEdges.emplace_back(b->producer, id);
            }
        }
    }

    // A block edge p->c closes a cycle iff c reaches p.
    auto reaches = [&](KernelId from, KernelId to) {
        std::set<KernelId> seen{from};
        std::vector<KernelId> stack{from};
        while (!stack.empty()) {
            auto k = stack.back();
            stack.pop_back();
            if (k == to) {
                return true;
            }
            for (auto next : succ[k]) {
                if (seen.insert(next).second) {
                    stack.push_back(next);
                }
            }
        }
        return false;
    };
    for (const auto& [p, c] : blockEdges) {
        if (reaches(c, p)) {
            diags.push_back({DiagCode::BLOCK_CYCLE, c, "block edge " + kernelLabel(p) + " -> " + kernelLabel(c) +
                                                          " lies on a dependency cycle"});
        }
    }
    return diags;
}

} // namespace redsharc::dfg
