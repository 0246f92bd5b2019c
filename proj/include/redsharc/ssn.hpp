#pragma once

#include "redsharc/core.hpp"
#include "redsharc/physical_channel.hpp"

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace redsharc::ssn {

enum class Direction : std::uint8_t { PRODUCER, CONSUMER };

struct Endpoint {
    KernelId kernel;
    PortIndex port = 0;
    Direction direction = Direction::PRODUCER;

    friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

enum class StreamState : std::uint8_t { UNROUTED, ROUTED, ACTIVE, FREED };

std::string_view streamStateName(StreamState s) noexcept;

/// A physical channel traversed on the way from producer to consumer.
struct Hop {
    CoreId core;
    PortIndex port = 0;
    std::size_t logical = 0;
};

struct StreamDescriptor {
    StreamId id;
    ElementType elemType = ElementType::DOUBLE;
    std::size_t depth = 1;
    std::optional<Endpoint> producer;
    std::optional<Endpoint> consumer;
    StreamState state = StreamState::UNROUTED;
    /// Elements that reached the consumer side, oldest first.
    std::deque<Element> buffer;
    /// Elements pushed but not yet popped, including those staged in hops.
    std::size_t inFlight = 0;
    std::vector<Hop> hops;
    std::uint64_t pushed = 0;
    std::uint64_t popped = 0;
};

/// The stream switch network: a routing table over bounded SPSC FIFOs.
///
/// The try* operations never block. A false/empty result means the caller has
/// to suspend until canPush()/canPop() turns true; kernelapi builds the
/// suspending kernel calls on top of them.
class Ssn {
public:
    explicit Ssn(std::size_t streamSlots);

    StreamId createStream(ElementType t, std::size_t depth);
    void routeStream(StreamId s, Endpoint producer, Endpoint consumer, const FinishedQuery& finished = {});

    bool tryPush(StreamId s, KernelId caller, const Element& e);
    std::optional<Element> tryPop(StreamId s, KernelId caller);
    std::optional<Element> tryPeek(StreamId s, KernelId caller) const;

    bool canPush(StreamId s) const;
    bool canPop(StreamId s) const;

    /// Occupancy: elements pushed and not yet popped.
    std::size_t streamLevel(StreamId s) const;
    void freeStream(StreamId s, const FinishedQuery& finished);

    /// Contents oldest-first, including elements still staged in channels.
    std::vector<Element> contents(StreamId s) const;

    const StreamDescriptor& descriptor(StreamId s) const;
    std::vector<StreamId> streams() const;
    bool contains(StreamId s) const noexcept { return streams_.count(s) != 0; }

    std::size_t slotCapacity() const noexcept { return capacity_; }
    std::size_t freeSlots() const noexcept { return capacity_ - live_; }
    std::uint64_t createdCount() const noexcept { return created_; }
    std::uint64_t freedCount() const noexcept { return freed_; }

    /// Multiplexes `logical` over physical port (core, port). When `owner` is
    /// the producer of a stream the hop is placed before any existing hop.
    kernelapi::PhysicalChannel& bindLogicalChannels(CoreId core, PortIndex port, std::vector<StreamId> logical,
                                                    std::optional<KernelId> owner = std::nullopt);
    void unbindChannel(CoreId core, PortIndex port);
    const kernelapi::PhysicalChannel* channel(CoreId core, PortIndex port) const;
    std::size_t channelCount() const noexcept { return channels_.size(); }

    /// Moves staged elements across physical channels until none can move.
    /// Returns the number of wire transfers performed.
    std::size_t pump();

    /// `stream <id> type=<t> depth=<d> level=<n> state=<s>`
    std::string render(StreamId s) const;

private:
    using ChannelKey = std::pair<std::uint32_t, PortIndex>;

    StreamDescriptor& get(StreamId s);
    const StreamDescriptor& get(StreamId s) const;
    void requireLive(const StreamDescriptor& d) const;
    void deliver(StreamDescriptor& d, std::size_t fromHop, const Element& e);

    std::size_t capacity_;
    std::size_t live_ = 0;
    std::uint64_t created_ = 0;
    std::uint64_t freed_ = 0;
    std::uint32_t nextId_ = 0;
    std::map<StreamId, StreamDescriptor> streams_;
    std::map<ChannelKey, std::unique_ptr<kernelapi::PhysicalChannel>> channels_;
};

} // namespace redsharc::ssn
