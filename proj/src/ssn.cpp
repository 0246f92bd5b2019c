#include "redsharc/ssn.hpp"

#include <algorithm>
#include <sstream>

namespace redsharc::ssn {

namespace {

std::string streamLabel(StreamId s)
{
    return "stream " + std::to_string(s.value);
}

} // namespace

std::string_view streamStateName(StreamState s) noexcept
{
    switch (s) {
    case StreamState::UNROUTED: return "UNROUTED";
    case StreamState::ROUTED: return "ROUTED";
    case StreamState::ACTIVE: return "ACTIVE";
    case StreamState::FREED: return "FREED";
    }
    return "?";
}

Ssn::Ssn(std::size_t streamSlots) : capacity_(streamSlots) {}

StreamDescriptor& Ssn::get(StreamId s)
{
    auto it = streams_.find(s);
    if (it == streams_.end()) {
        throw Error(ErrorCode::UnknownStream, streamLabel(s));
    }
    return it->second;
}

const StreamDescriptor& Ssn::get(StreamId s) const
{
    auto it = streams_.find(s);
    if (it == streams_.end()) {
        throw Error(ErrorCode::UnknownStream, streamLabel(s));
    }
    return it->second;
}

void Ssn::requireLive(const StreamDescriptor& d) const
{
    if (d.state == StreamState::UNROUTED || d.state == StreamState::FREED) {
        throw Error(ErrorCode::StreamInactive,
                    streamLabel(d.id) + " is " + std::string(streamStateName(d.state)));
    }
}

StreamId Ssn::createStream(ElementType t, std::size_t depth)
{
    if (depth == 0) {
        throw Error(ErrorCode::InvalidArgument, "stream depth must be at least 1");
    }
    if (live_ >= capacity_) {
        throw Error(ErrorCode::CapacityExhausted,
                    "all " + std::to_string(capacity_) + " SSN stream slots are allocated");
    }
    StreamDescriptor d;
    d.id = StreamId{nextId_++};
    d.elemType = t;
    d.depth = depth;
    ++live_;
    ++created_;
    auto id = d.id;
    streams_.emplace(id, std::move(d));
    return id;
}

void Ssn::routeStream(StreamId s, Endpoint producer, Endpoint consumer, const FinishedQuery& finished)
{
    auto& d = get(s);
    if (producer.direction != Direction::PRODUCER || consumer.direction != Direction::CONSUMER) {
        throw Error(ErrorCode::IllegalRoute, streamLabel(s) + " needs a PRODUCER and a CONSUMER endpoint");
    }
    if (d.state == StreamState::FREED) {
        throw Error(ErrorCode::StreamInactive, streamLabel(s) + " is FREED");
    }
    if (d.state != StreamState::UNROUTED) {
        bool reclaimable = finished && finished(d.producer->kernel) && finished(d.consumer->kernel);
        if (!reclaimable) {
            throw Error(ErrorCode::Busy, streamLabel(s) + " is in use by unfinished kernels");
        }
        d.buffer.clear();
        d.inFlight = 0;
        d.hops.clear();
    }
    d.producer = producer;
    d.consumer = consumer;
    d.state = StreamState::ROUTED;
}

bool Ssn::tryPush(StreamId s, KernelId caller, const Element& e)
{
    auto& d = get(s);
    requireLive(d);
    if (d.producer->kernel != caller) {
        throw Error(ErrorCode::NotEndpoint,
                    "kernel " + std::to_string(caller.value) + " is not the producer of " + streamLabel(s));
    }
    if (!checkTypeMatch(e.type(), d.elemType)) {
        throw Error(ErrorCode::TypeMismatch, "pushing " + std::string(elementTypeName(e.type())) + " onto " +
                                                 std::string(elementTypeName(d.elemType)) + " " + streamLabel(s));
    }
    if (d.inFlight >= d.depth) {
        return false;
    }
    if (d.hops.empty()) {
        d.buffer.push_back(e);
    } else {
        const auto& h = d.hops.front();
        channels_.at({h.core.value, h.port})->offer(h.logical, e);
    }
    ++d.inFlight;
    ++d.pushed;
    d.state = StreamState::ACTIVE;
    return true;
}

std::optional<Element> Ssn::tryPop(StreamId s, KernelId caller)
{
    auto& d = get(s);
    requireLive(d);
    if (d.consumer->kernel != caller) {
        throw Error(ErrorCode::NotEndpoint,
                    "kernel " + std::to_string(caller.value) + " is not the consumer of " + streamLabel(s));
    }
    if (d.buffer.empty()) {
        return std::nullopt;
    }
    Element e = d.buffer.front();
    d.buffer.pop_front();
    --d.inFlight;
    ++d.popped;
    d.state = StreamState::ACTIVE;
    return e;
}

std::optional<Element> Ssn::tryPeek(StreamId s, KernelId caller) const
{
    const auto& d = get(s);
    requireLive(d);
    if (d.consumer->kernel != caller) {
        throw Error(ErrorCode::NotEndpoint,
                    "kernel " + std::to_string(caller.value) + " is not the consumer of " + streamLabel(s));
    }
    if (d.buffer.empty()) {
        return std::nullopt;
    }
    return d.buffer.front();
}

bool Ssn::canPush(StreamId s) const
{
    const auto& d = get(s);
    return (d.state == StreamState::ROUTED || d.state == StreamState::ACTIVE) && d.inFlight < d.depth;
}

bool Ssn::canPop(StreamId s) const
{
    const auto& d = get(s);
    return (d.state == StreamState::ROUTED || d.state == StreamState::ACTIVE) && !d.buffer.empty();
}

std::size_t Ssn::streamLevel(StreamId s) const
{
    return get(s).inFlight;
}

void Ssn::freeStream(StreamId s, const FinishedQuery& finished)
{
    auto& d = get(s);
    if (d.state == StreamState::FREED) {
        throw Error(ErrorCode::StreamInactive, streamLabel(s) + " is already FREED");
    }
    if (d.producer && d.consumer) {
        if (!finished || !finished(d.producer->kernel) || !finished(d.consumer->kernel)) {
            throw Error(ErrorCode::EndpointsActive, streamLabel(s) + " still has an unfinished endpoint");
        }
    }
    d.state = StreamState::FREED;
    d.buffer.clear();
    d.buffer.shrink_to_fit();
    d.inFlight = 0;
    d.hops.clear();
    --live_;
    ++freed_;
}

std::vector<Element> Ssn::contents(StreamId s) const
{
    const auto& d = get(s);
    std::vector<Element> out(d.buffer.begin(), d.buffer.end());
    for (auto it = d.hops.rbegin(); it != d.hops.rend(); ++it) {
        auto staged = channels_.at({it->core.value, it->port})->stagedContents(it->logical);
        out.insert(out.end(), staged.begin(), staged.end());
    }
    return out;
}

const StreamDescriptor& Ssn::descriptor(StreamId s) const
{
    return get(s);
}

std::vector<StreamId> Ssn::streams() const
{
    std::vector<StreamId> ids;
    ids.reserve(streams_.size());
    for (const auto& [id, _] : streams_) {
        ids.push_back(id);
    }
    return ids;
}

kernelapi::PhysicalChannel& Ssn::bindLogicalChannels(CoreId core, PortIndex port, std::vector<StreamId> logical,
                                                     std::optional<KernelId> owner)
{
    ChannelKey key{core.value, port};
    if (channels_.count(key) != 0) {
        throw Error(ErrorCode::PortBound,
                    "port " + std::to_string(port) + " of core " + std::to_string(core.value) + " is already bound");
    }
    if (logical.empty()) {
        throw Error(ErrorCode::InvalidArgument, "at least one logical stream is required");
    }
    std::vector<std::size_t> depths;
    for (auto s : logical) {
        const auto& d = get(s);
        if (d.state == StreamState::FREED) {
            throw Error(ErrorCode::StreamInactive, streamLabel(s) + " is FREED");
        }
        for (const auto& h : d.hops) {
            if (channels_.at({h.core.value, h.port})->staged(h.logical) != 0) {
                throw Error(ErrorCode::Busy, streamLabel(s) + " has elements staged in a channel");
            }
        }
        depths.push_back(d.depth);
    }
    auto ch = std::make_unique<kernelapi::PhysicalChannel>(core, port, logical, depths);
    for (std::size_t i = 0; i < logical.size(); ++i) {
        auto& d = get(logical[i]);
        Hop hop{core, port, i};
        if (owner && d.producer && d.producer->kernel == *owner) {
            d.hops.insert(d.hops.begin(), hop);
        } else {
            d.hops.push_back(hop);
        }
    }
    auto& ref = *ch;
    channels_.emplace(key, std::move(ch));
    return ref;
}

void Ssn::unbindChannel(CoreId core, PortIndex port)
{
    auto it = channels_.find({core.value, port});
    if (it == channels_.end()) {
        return;
    }
    if (it->second->totalStaged() != 0) {
        throw Error(ErrorCode::Busy, "channel still holds staged elements");
    }
    for (auto s : it->second->boundLogical()) {
        auto& d = get(s);
        std::erase_if(d.hops, [&](const Hop& h) { return h.core == core && h.port == port; });
    }
    channels_.erase(it);
}

const kernelapi::PhysicalChannel* Ssn::channel(CoreId core, PortIndex port) const
{
    auto it = channels_.find({core.value, port});
    return it == channels_.end() ? nullptr : it->second.get();
}

void Ssn::deliver(StreamDescriptor& d, std::size_t fromHop, const Element& e)
{
    if (fromHop + 1 < d.hops.size()) {
        const auto& next = d.hops[fromHop + 1];
        channels_.at({next.core.value, next.port})->offer(next.logical, e);
    } else {
        d.buffer.push_back(e);
    }
}

std::size_t Ssn::pump()
{
    std::size_t transfers = 0;
    bool moved = true;
    while (moved) {
        moved = false;
        for (auto& [key, ch] : channels_) {
            auto always = [](std::size_t) { return true; };
            while (auto tagged = ch->transmit(always)) {
                auto& d = get(ch->boundLogical()[tagged->logical]);
                auto hop = std::find_if(d.hops.begin(), d.hops.end(), [&](const Hop& h) {
                    return h.core.value == key.first && h.port == key.second;
                });
                deliver(d, static_cast<std::size_t>(hop - d.hops.begin()), tagged->element);
                ++transfers;
                moved = true;
            }
        }
    }
    return transfers;
}

std::string Ssn::render(StreamId s) const
{
    const auto& d = get(s);
    std::ostringstream os;
    os << "stream " << s.value << " type=" << elementTypeName(d.elemType) << " depth=" << d.depth
       << " level=" << d.inFlight << " state=" << streamStateName(d.state);
    return os.str();
}

} // namespace redsharc::ssn
