#include "redsharc/bsn.hpp"

#include <sstream>

namespace redsharc::bsn {

namespace {

std::string blockLabel(BlockId b)
{
    return "block " + std::to_string(b.value);
}

} // namespace

std::string_view placementHintName(PlacementHint h) noexcept
{
    switch (h) {
    case PlacementHint::AUTO: return "auto";
    case PlacementHint::PREFER_ON_CHIP: return "on_chip";
    case PlacementHint::PREFER_OFF_CHIP: return "off_chip";
    }
    return "?";
}

std::optional<PlacementHint> parsePlacementHint(std::string_view name) noexcept
{
    for (auto h : {PlacementHint::AUTO, PlacementHint::PREFER_ON_CHIP, PlacementHint::PREFER_OFF_CHIP}) {
        if (placementHintName(h) == name) {
            return h;
        }
    }
    return std::nullopt;
}

std::size_t footprintWords(ElementType t, std::size_t length) noexcept
{
    return (length * elementWidthBytes(t) + kWordBytes - 1) / kWordBytes;
}

std::size_t MemoryPools::freeWords(MemoryClass m) const noexcept
{
    return m == MemoryClass::ON_CHIP ? onChipCapacityWords - onChipUsed : offChipCapacityWords - offChipUsed;
}

Bsn::Bsn(std::size_t onChipWords, std::size_t offChipWords)
{
    pools_.onChipCapacityWords = onChipWords;
    pools_.offChipCapacityWords = offChipWords;
}

BlockDescriptor& Bsn::get(BlockId b)
{
    auto it = blocks_.find(b);
    if (it == blocks_.end()) {
        throw Error(ErrorCode::UnknownBlock, blockLabel(b));
    }
    return it->second;
}

const BlockDescriptor& Bsn::get(BlockId b) const
{
    auto it = blocks_.find(b);
    if (it == blocks_.end()) {
        throw Error(ErrorCode::UnknownBlock, blockLabel(b));
    }
    return it->second;
}

std::optional<MemoryClass> Bsn::placementFor(ElementType t, std::size_t length, PlacementHint hint) const
{
    const auto words = footprintWords(t, length);
    const MemoryClass first = hint == PlacementHint::PREFER_OFF_CHIP ? MemoryClass::OFF_CHIP : MemoryClass::ON_CHIP;
    const MemoryClass second = first == MemoryClass::ON_CHIP ? MemoryClass::OFF_CHIP : MemoryClass::ON_CHIP;
    if (pools_.freeWords(first) >= words) {
        return first;
    }
    if (pools_.freeWords(second) >= words) {
        return second;
    }
    return std::nullopt;
}

BlockId Bsn::allocBlock(ElementType t, std::size_t length, PlacementHint hint)
{
    if (length == 0) {
        throw Error(ErrorCode::InvalidArgument, "block length must be at least 1");
    }
    auto cls = placementFor(t, length, hint);
    if (!cls) {
        throw Error(ErrorCode::OutOfMemory, "no pool can hold " + std::to_string(footprintWords(t, length)) + " words");
    }
    const auto words = footprintWords(t, length);
    (*cls == MemoryClass::ON_CHIP ? pools_.onChipUsed : pools_.offChipUsed) += words;

    BlockDescriptor d;
    d.id = BlockId{nextId_++};
    d.elemType = t;
    d.length = length;
    d.memClass = *cls;
    d.storage.assign(length, Element::zero(t));
    auto id = d.id;
    blocks_.emplace(id, std::move(d));
    ++allocated_;
    return id;
}

const BlockDescriptor& Bsn::checkedAccess(BlockId b, std::size_t index) const
{
    const auto& d = get(b);
    if (d.state == BlockState::FREED) {
        throw Error(ErrorCode::BlockInactive, blockLabel(b) + " is FREED");
    }
    if (index >= d.length) {
        throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(index) + " outside " + blockLabel(b) +
                                                    " of length " + std::to_string(d.length));
    }
    return d;
}

void Bsn::blockWrite(BlockId b, KernelId caller, std::size_t index, const Element& e)
{
    const auto& d = checkedAccess(b, index);
    if (d.grants.count(caller) == 0) {
        throw Error(ErrorCode::AccessDenied, "kernel " + std::to_string(caller.value) + " has no grant on " + blockLabel(b));
    }
    debugWrite(b, index, e);
}

Element Bsn::blockRead(BlockId b, KernelId caller, std::size_t index) const
{
    const auto& d = checkedAccess(b, index);
    if (d.grants.count(caller) == 0) {
        throw Error(ErrorCode::AccessDenied, "kernel " + std::to_string(caller.value) + " has no grant on " + blockLabel(b));
    }
    return d.storage[index];
}

void Bsn::debugWrite(BlockId b, std::size_t index, const Element& e)
{
    checkedAccess(b, index);
    auto& d = get(b);
    if (!checkTypeMatch(e.type(), d.elemType)) {
        throw Error(ErrorCode::TypeMismatch, "writing " + std::string(elementTypeName(e.type())) + " into " +
                                                 std::string(elementTypeName(d.elemType)) + " " + blockLabel(b));
    }
    d.storage[index] = e;
}

Element Bsn::debugRead(BlockId b, std::size_t index) const
{
    return checkedAccess(b, index).storage[index];
}

void Bsn::grantBlockAccess(BlockId b, KernelId k)
{
    auto& d = get(b);
    if (d.state == BlockState::FREED) {
        throw Error(ErrorCode::BlockInactive, blockLabel(b) + " is FREED");
    }
    d.grants.insert(k);
}

void Bsn::freeBlock(BlockId b, const FinishedQuery& finished)
{
    auto& d = get(b);
    if (d.state == BlockState::FREED) {
        throw Error(ErrorCode::BlockInactive, blockLabel(b) + " is already FREED");
    }
    for (auto k : d.grants) {
        if (!finished || !finished(k)) {
            throw Error(ErrorCode::EndpointsActive, blockLabel(b) + " is still used by kernel " + std::to_string(k.value));
        }
    }
    const auto words = footprintWords(d.elemType, d.length);
    (d.memClass == MemoryClass::ON_CHIP ? pools_.onChipUsed : pools_.offChipUsed) -= words;
    d.state = BlockState::FREED;
    d.storage.clear();
    d.storage.shrink_to_fit();
    d.grants.clear();
    ++freed_;
}

const BlockDescriptor& Bsn::descriptor(BlockId b) const
{
    return get(b);
}

std::vector<BlockId> Bsn::blocks() const
{
    std::vector<BlockId> ids;
    for (const auto& [id, _] : blocks_) {
        ids.push_back(id);
    }
    return ids;
}

std::string Bsn::render(BlockId b) const
{
    const auto& d = get(b);
    std::ostringstream os;
    os << "block " << b.value << " type=" << elementTypeName(d.elemType) << " len=" << d.length
       << " class=" << memoryClassName(d.memClass) << " grants=[";
    bool first = true;
    for (auto k : d.grants) {
        if (!first) {
            os << ',';
        }
        first = false;
        if (k == kControlKernel) {
            os << "control";
        } else {
            os << k.value;
        }
    }
    os << ']';
    return os.str();
}

} // namespace redsharc::bsn
