#pragma once

#include "redsharc/bsn.hpp"
#include "redsharc/core.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace redsharc::dfg {

enum class EdgeKind : std::uint8_t { STREAM, BLOCK };

std::string_view edgeKindName(EdgeKind k) noexcept;

struct OutputDecl {
    EdgeKind kind = EdgeKind::STREAM;
    ElementType elemType = ElementType::DOUBLE;
    /// Exact number of elements produced; doubles as the termination criterion.
    std::size_t length = 1;
    /// FIFO depth for streams; the system default applies when unset.
    std::optional<std::size_t> depth;
    bsn::PlacementHint memory = bsn::PlacementHint::AUTO;

    friend bool operator==(const OutputDecl&, const OutputDecl&) = default;
};

struct InputBinding {
    EdgeKind kind = EdgeKind::STREAM;
    KernelId producer;
    PortIndex producerPort = 0;
    /// Element type the consumer expects, checked against the producer's declaration.
    std::optional<ElementType> expectedType;

    friend bool operator==(const InputBinding&, const InputBinding&) = default;
};

struct DfgNode {
    KernelId kernel;
    std::string implRef;
    std::vector<std::optional<InputBinding>> inputs;
    std::vector<std::optional<OutputDecl>> outputs;

    std::size_t numInputs() const noexcept { return inputs.size(); }
    std::size_t numOutputs() const noexcept { return outputs.size(); }

    friend bool operator==(const DfgNode&, const DfgNode&) = default;
};

struct PortRef {
    KernelId kernel;
    PortIndex port = 0;

    friend auto operator<=>(const PortRef&, const PortRef&) = default;
};

enum class DiagCode : std::uint8_t {
    UNBOUND_PORT,
    UNKNOWN_PRODUCER,
    PORT_OUT_OF_RANGE,
    KIND_MISMATCH,
    TYPE_MISMATCH,
    STREAM_FANOUT,
    BLOCK_CYCLE,
    UNRESOLVED_IMPL,
};

std::string_view diagCodeName(DiagCode c) noexcept;

struct Diagnostic {
    DiagCode code;
    KernelId kernel;
    std::string message;
};

using ImplResolver = std::function<bool(const std::string&)>;

/// Application dataflow graph: kernels as nodes, stream/block dependencies as edges.
class Dfg {
public:
    void initKernel(KernelId k, std::string implRef, std::size_t numInputs, std::size_t numOutputs);
    void addStreamDependency(KernelId consumer, PortIndex consumerPort, KernelId producer, PortIndex producerPort,
                             std::optional<ElementType> expectedType = std::nullopt);
    void addBlockDependency(KernelId consumer, PortIndex consumerPort, KernelId producer, PortIndex producerPort,
                            std::optional<ElementType> expectedType = std::nullopt);
    void addOutputStream(KernelId k, PortIndex port, ElementType t, std::size_t length,
                         std::optional<std::size_t> depth = std::nullopt);
    void addOutputBlock(KernelId k, PortIndex port, ElementType t, std::size_t length,
                        bsn::PlacementHint memory = bsn::PlacementHint::AUTO);

    /// Empty iff the graph can be configured and run. Block edges (and any
    /// cycle passing through one) must be acyclic; stream cycles are allowed.
    std::vector<Diagnostic> validate(const ImplResolver& resolves) const;

    bool empty() const noexcept { return nodes_.empty(); }
    bool contains(KernelId k) const noexcept { return nodes_.count(k) != 0; }
    const DfgNode& node(KernelId k) const;
    const std::map<KernelId, DfgNode>& nodes() const noexcept { return nodes_; }
    std::vector<KernelId> kernels() const;

    /// Consumer input ports bound to output (producer, port), ascending.
    std::vector<PortRef> consumersOf(KernelId producer, PortIndex port) const;
    const OutputDecl* outputDecl(KernelId producer, PortIndex port) const;

    friend bool operator==(const Dfg&, const Dfg&) = default;

private:
    DfgNode& mutableNode(KernelId k);
    void addDependency(EdgeKind kind, KernelId consumer, PortIndex consumerPort, KernelId producer,
                       PortIndex producerPort, std::optional<ElementType> expectedType);
    void addOutput(EdgeKind kind, KernelId k, PortIndex port, OutputDecl decl);

    std::map<KernelId, DfgNode> nodes_;
};

/// JSON form: {"kernels":[...],"edges":[...],"outputs":[...]}.
Dfg parseDfg(const std::string& text);
std::string renderDfg(const Dfg& g);

} // namespace redsharc::dfg
