#include "redsharc/physical_channel.hpp"

namespace redsharc::kernelapi {

PhysicalChannel::PhysicalChannel(CoreId core, PortIndex port, std::vector<StreamId> logical,
                                 std::vector<std::size_t> stagingDepths)
    : core_(core), port_(port), logical_(std::move(logical)), depths_(std::move(stagingDepths))
{
    if (logical_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "a physical channel needs at least one logical stream");
    }
    if (depths_.size() != logical_.size()) {
        throw Error(ErrorCode::InvalidArgument, "one staging depth per logical stream is required");
    }
    for (auto d : depths_) {
        if (d == 0) {
            throw Error(ErrorCode::InvalidArgument, "staging depth must be positive");
        }
    }
    staging_.resize(logical_.size());
}

std::optional<std::size_t> PhysicalChannel::indexOf(StreamId s) const noexcept
{
    for (std::size_t i = 0; i < logical_.size(); ++i) {
        if (logical_[i] == s) {
            return i;
        }
    }
    return std::nullopt;
}

bool PhysicalChannel::canOffer(std::size_t logical) const
{
    return staging_.at(logical).size() < depths_.at(logical);
}

bool PhysicalChannel::offer(std::size_t logical, Element e)
{
    if (!canOffer(logical)) {
        return false;
    }
    staging_[logical].push_back(e);
    return true;
}

std::optional<TaggedElement> PhysicalChannel::transmit(const std::function<bool(std::size_t)>& destinationReady)
{
    const std::size_t n = staging_.size();
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t idx = (cursor_ + step) % n;
        if (staging_[idx].empty() || !destinationReady(idx)) {
            continue;
        }
        TaggedElement out{idx, staging_[idx].front()};
        staging_[idx].pop_front();
        cursor_ = (idx + 1) % n;
        return out;
    }
    return std::nullopt;
}

std::size_t PhysicalChannel::staged(std::size_t logical) const
{
    return staging_.at(logical).size();
}

std::size_t PhysicalChannel::totalStaged() const noexcept
{
    std::size_t total = 0;
    for (const auto& q : staging_) {
        total += q.size();
    }
    return total;
}

std::vector<Element> PhysicalChannel::stagedContents(std::size_t logical) const
{
    const auto& q = staging_.at(logical);
    return {q.begin(), q.end()};
}

} // namespace redsharc::kernelapi
