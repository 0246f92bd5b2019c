#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace redsharc {

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

enum class ErrorCode {
    InvalidArgument,
    CapacityExhausted,
    IllegalRoute,
    Busy,
    TypeMismatch,
    NotEndpoint,
    UnknownStream,
    StreamInactive,
    EndpointsActive,
    OutOfMemory,
    IndexOutOfRange,
    AccessDenied,
    UnknownBlock,
    BlockInactive,
    DuplicateKernel,
    UnknownKernel,
    PortOutOfRange,
    Rebinding,
    ConfigMismatch,
    PortLimit,
    IncompatibleCore,
    NoCapacity,
    UnknownCore,
    NotRunning,
    NotPaused,
    DuplicateName,
    UnknownImpl,
    AlreadyFinished,
    KernelFinished,
    NotResident,
    PortBound,
    IllegalState,
    IoFailure,
    ParseError,
    SemanticError,
    DimensionMismatch,
    NoConvergence,
    KOutOfRange,
    EmptyReferences,
};

std::string_view errorCodeName(ErrorCode code);

/// Every runtime failure surfaces as an Error carrying a stable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// ----------------------------------------------------------------------------
// Identifiers
// ----------------------------------------------------------------------------

template <typename Tag>
struct Id {
    std::uint32_t value{};

    constexpr auto operator<=>(const Id&) const = default;
};

template <typename Tag>
std::ostream& operator<<(std::ostream& os, Id<Tag> id)
{
    return os << id.value;
}

using KernelId = Id<struct KernelTag>;
using StreamId = Id<struct StreamTag>;
using BlockId = Id<struct BlockTag>;
using CoreId = Id<struct CoreTag>;
using SlotId = Id<struct SlotTag>;
using PortIndex = std::uint32_t;

/// Answers whether a kernel has FINISHED. Supplied by the control kernel.
using FinishedQuery = std::function<bool(KernelId)>;

/// Reserved endpoint id for the control kernel, which drains terminal outputs.
inline constexpr KernelId kControlKernel{std::numeric_limits<std::uint32_t>::max()};

// ----------------------------------------------------------------------------
// Element typing
// ----------------------------------------------------------------------------

enum class ElementType : std::uint8_t { U32, U64, F32, DOUBLE };

std::size_t elementWidthBytes(ElementType t) noexcept;
bool checkTypeMatch(ElementType a, ElementType b) noexcept;
std::string_view elementTypeName(ElementType t) noexcept;
std::optional<ElementType> parseElementType(std::string_view name) noexcept;

/// A tagged machine word. The payload alternative index always equals the tag.
class Element {
public:
    using Payload = std::variant<std::uint32_t, std::uint64_t, float, double>;

    Element() : payload_(0.0) {}
    explicit Element(double v) : payload_(v) {}
    explicit Element(float v) : payload_(v) {}

    static Element u32(std::uint32_t v) { return Element(Payload(std::in_place_index<0>, v)); }
    static Element u64(std::uint64_t v) { return Element(Payload(std::in_place_index<1>, v)); }
    static Element f32(float v) { return Element(v); }
    static Element f64(double v) { return Element(v); }
    static Element zero(ElementType t);
    /// Numeric conversion of `v` into an element of type `t`.
    static Element fromDouble(ElementType t, double v);
    static Element fromBits(ElementType t, std::uint64_t bits);

    ElementType type() const noexcept { return static_cast<ElementType>(payload_.index()); }

    template <typename T>
    T as() const
    {
        if (const T* p = std::get_if<T>(&payload_)) {
            return *p;
        }
        throw Error(ErrorCode::TypeMismatch, "element holds " + std::string(elementTypeName(type())));
    }

    double toDouble() const noexcept;
    /// Raw payload bits, zero-extended to 64.
    std::uint64_t bits() const noexcept;

    /// Bitwise equality. Comparing elements of different types throws TypeMismatch.
    friend bool operator==(const Element& a, const Element& b);

private:
    explicit Element(Payload p) : payload_(p) {}

    Payload payload_;
};

std::ostream& operator<<(std::ostream& os, const Element& e);
/// Renders the payload only (no type prefix); doubles use round-trip precision.
std::string formatPayload(const Element& e);
Element parsePayload(ElementType t, std::string_view text);

// ----------------------------------------------------------------------------
// Shared enumerations
// ----------------------------------------------------------------------------

/// BSN memory pools: fast on-chip BRAM or dense off-chip memory.
enum class MemoryClass : std::uint8_t { ON_CHIP, OFF_CHIP };

std::string_view memoryClassName(MemoryClass m) noexcept;

/// ANALYSIS records performance events; RELEASE runs without the recorder.
enum class RunMode : std::uint8_t { ANALYSIS, RELEASE };

std::string_view runModeName(RunMode m) noexcept;

// ----------------------------------------------------------------------------
// Kernel lifecycle
// ----------------------------------------------------------------------------

enum class KernelLifecycle : std::uint8_t { PENDING = 0, READY = 1, CONFIGURED = 2, RUNNING = 3, FINISHED = 4 };

std::string_view lifecycleName(KernelLifecycle s) noexcept;

/// Records the states a kernel passes through and rejects regressions.
class LifecycleTracker {
public:
    KernelLifecycle state() const noexcept { return history_.back(); }
    const std::vector<KernelLifecycle>& history() const noexcept { return history_; }

    /// Moves forward to `next`; throws IllegalState unless `next` is strictly later.
    void advance(KernelLifecycle next);

private:
    std::vector<KernelLifecycle> history_{KernelLifecycle::PENDING};
};

/// True iff `seq` is a strictly increasing subsequence of the lifecycle order.
bool isMonotoneLifecycle(const std::vector<KernelLifecycle>& seq) noexcept;

} // namespace redsharc

template <typename Tag>
struct std::hash<redsharc::Id<Tag>> {
    std::size_t operator()(redsharc::Id<Tag> id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
