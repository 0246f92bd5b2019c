#pragma once

#include "redsharc/core.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace redsharc::bsn {

enum class PlacementHint : std::uint8_t { AUTO, PREFER_ON_CHIP, PREFER_OFF_CHIP };

std::string_view placementHintName(PlacementHint h) noexcept;
std::optional<PlacementHint> parsePlacementHint(std::string_view name) noexcept;

/// Pool accounting unit.
inline constexpr std::size_t kWordBytes = 8;

/// Words occupied by `length` elements of type `t`, rounded up to whole words.
std::size_t footprintWords(ElementType t, std::size_t length) noexcept;

struct MemoryPools {
    std::size_t onChipCapacityWords = 0;
    std::size_t offChipCapacityWords = 0;
    std::size_t onChipUsed = 0;
    std::size_t offChipUsed = 0;

    std::size_t freeWords(MemoryClass m) const noexcept;
};

enum class BlockState : std::uint8_t { ALLOCATED, FREED };

struct BlockDescriptor {
    BlockId id;
    ElementType elemType = ElementType::DOUBLE;
    std::size_t length = 0;
    MemoryClass memClass = MemoryClass::ON_CHIP;
    BlockState state = BlockState::ALLOCATED;
    std::set<KernelId> grants;
    std::vector<Element> storage;
};

/// The block switch network: random-access element arrays in two memory pools.
class Bsn {
public:
    Bsn(std::size_t onChipWords, std::size_t offChipWords);

    BlockId allocBlock(ElementType t, std::size_t length, PlacementHint hint = PlacementHint::AUTO);
    /// Which pool allocBlock would choose right now, if any.
    std::optional<MemoryClass> placementFor(ElementType t, std::size_t length, PlacementHint hint) const;

    void blockWrite(BlockId b, KernelId caller, std::size_t index, const Element& e);
    Element blockRead(BlockId b, KernelId caller, std::size_t index) const;
    void grantBlockAccess(BlockId b, KernelId k);
    /// Requires every granted kernel (producer and consumers) to be FINISHED.
    void freeBlock(BlockId b, const FinishedQuery& finished);

    /// Grant-free access for the paused debugger.
    void debugWrite(BlockId b, std::size_t index, const Element& e);
    Element debugRead(BlockId b, std::size_t index) const;

    const BlockDescriptor& descriptor(BlockId b) const;
    std::vector<BlockId> blocks() const;
    const MemoryPools& pools() const noexcept { return pools_; }
    std::uint64_t allocatedCount() const noexcept { return allocated_; }
    std::uint64_t freedCount() const noexcept { return freed_; }

    /// `block <id> type=<t> len=<n> class=<ON_CHIP|OFF_CHIP> grants=[...]`
    std::string render(BlockId b) const;

private:
    BlockDescriptor& get(BlockId b);
    const BlockDescriptor& get(BlockId b) const;
    const BlockDescriptor& checkedAccess(BlockId b, std::size_t index) const;

    MemoryPools pools_;
    std::uint32_t nextId_ = 0;
    std::uint64_t allocated_ = 0;
    std::uint64_t freed_ = 0;
    std::map<BlockId, BlockDescriptor> blocks_;
};

} // namespace redsharc::bsn
