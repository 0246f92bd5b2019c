#pragma once

#include "redsharc/core.hpp"

#include <deque>
#include <functional>
#include <optional>
#include <vector>

namespace redsharc::kernelapi {

/// An element on the shared wire, tagged with the logical channel it belongs to.
struct TaggedElement {
    std::size_t logical = 0;
    Element element;
};

/// One physical stream port carrying several logical streams.
///
/// Each logical stream owns a bounded staging queue. transmit() moves a single
/// element onto the wire, visiting the logical queues round-robin in bound
/// order and skipping any queue that is empty or whose destination cannot
/// accept. A stalled logical stream therefore never holds back the others.
class PhysicalChannel {
public:
    PhysicalChannel(CoreId core, PortIndex port, std::vector<StreamId> logical, std::vector<std::size_t> stagingDepths);

    CoreId core() const noexcept { return core_; }
    PortIndex port() const noexcept { return port_; }
    const std::vector<StreamId>& boundLogical() const noexcept { return logical_; }

    /// Index of `s` in the bound order, if bound here.
    std::optional<std::size_t> indexOf(StreamId s) const noexcept;

    bool canOffer(std::size_t logical) const;
    /// Stages `e` for logical channel `logical`; false when its staging queue is full.
    bool offer(std::size_t logical, Element e);

    /// Puts the next element on the wire. `destinationReady(logical)` reports
    /// whether the far side of a logical channel can take one element.
    std::optional<TaggedElement> transmit(const std::function<bool(std::size_t)>& destinationReady);

    std::size_t staged(std::size_t logical) const;
    std::size_t totalStaged() const noexcept;
    std::vector<Element> stagedContents(std::size_t logical) const;

private:
    CoreId core_;
    PortIndex port_;
    std::vector<StreamId> logical_;
    std::vector<std::size_t> depths_;
    std::vector<std::deque<Element>> staging_;
    std::size_t cursor_ = 0;
};

} // namespace redsharc::kernelapi
