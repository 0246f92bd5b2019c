#include "redsharc/core.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace redsharc {

std::string_view errorCodeName(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::CapacityExhausted: return "CAPACITY_EXHAUSTED";
    case ErrorCode::IllegalRoute: return "ILLEGAL_ROUTE";
    case ErrorCode::Busy: return "BUSY";
    case ErrorCode::TypeMismatch: return "TYPE_MISMATCH";
    case ErrorCode::NotEndpoint: return "NOT_ENDPOINT";
    case ErrorCode::UnknownStream: return "UNKNOWN_STREAM";
    case ErrorCode::StreamInactive: return "STREAM_INACTIVE";
    case ErrorCode::EndpointsActive: return "ENDPOINTS_ACTIVE";
    case ErrorCode::OutOfMemory: return "OUT_OF_MEMORY";
    case ErrorCode::IndexOutOfRange: return "INDEX_OUT_OF_RANGE";
    case ErrorCode::AccessDenied: return "ACCESS_DENIED";
    case ErrorCode::UnknownBlock: return "UNKNOWN_BLOCK";
    case ErrorCode::BlockInactive: return "BLOCK_INACTIVE";
    case ErrorCode::DuplicateKernel: return "DUPLICATE_KERNEL";
    case ErrorCode::UnknownKernel: return "UNKNOWN_KERNEL";
    case ErrorCode::PortOutOfRange: return "PORT_OUT_OF_RANGE";
    case ErrorCode::Rebinding: return "REBINDING";
    case ErrorCode::ConfigMismatch: return "CONFIG_MISMATCH";
    case ErrorCode::PortLimit: return "PORT_LIMIT";
    case ErrorCode::IncompatibleCore: return "INCOMPATIBLE_CORE";
    case ErrorCode::NoCapacity: return "NO_CAPACITY";
    case ErrorCode::UnknownCore: return "UNKNOWN_CORE";
    case ErrorCode::NotRunning: return "NOT_RUNNING";
    case ErrorCode::NotPaused: return "NOT_PAUSED";
    case ErrorCode::DuplicateName: return "DUPLICATE_NAME";
    case ErrorCode::UnknownImpl: return "UNKNOWN_IMPL";
    case ErrorCode::AlreadyFinished: return "ALREADY_FINISHED";
    case ErrorCode::KernelFinished: return "KERNEL_FINISHED";
    case ErrorCode::NotResident: return "NOT_RESIDENT";
    case ErrorCode::PortBound: return "PORT_BOUND";
    case ErrorCode::IllegalState: return "ILLEGAL_STATE";
    case ErrorCode::IoFailure: return "IO_FAILURE";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::SemanticError: return "SEMANTIC_ERROR";
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::KOutOfRange: return "K_OUT_OF_RANGE";
    case ErrorCode::EmptyReferences: return "EMPTY_REFERENCES";
    }
    return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(errorCodeName(code)) + ": " + message), code_(code)
{
}

std::size_t elementWidthBytes(ElementType t) noexcept
{
    switch (t) {
    case ElementType::U32:
    case ElementType::F32:
        return 4;
    case ElementType::U64:
    case ElementType::DOUBLE:
        return 8;
    }
    return 8;
}

bool checkTypeMatch(ElementType a, ElementType b) noexcept
{
    return a == b;
}

std::string_view elementTypeName(ElementType t) noexcept
{
    switch (t) {
    case ElementType::U32: return "U32";
    case ElementType::U64: return "U64";
    case ElementType::F32: return "F32";
    case ElementType::DOUBLE: return "DOUBLE";
    }
    return "?";
}

std::optional<ElementType> parseElementType(std::string_view name) noexcept
{
    for (auto t : {ElementType::U32, ElementType::U64, ElementType::F32, ElementType::DOUBLE}) {
        if (elementTypeName(t) == name) {
            return t;
        }
    }
    return std::nullopt;
}

Element Element::zero(ElementType t)
{
    return fromBits(t, 0);
}

Element Element::fromDouble(ElementType t, double v)
{
    switch (t) {
    case ElementType::U32: return u32(static_cast<std::uint32_t>(v));
    case ElementType::U64: return u64(static_cast<std::uint64_t>(v));
    case ElementType::F32: return f32(static_cast<float>(v));
    case ElementType::DOUBLE: return f64(v);
    }
    return f64(v);
}

Element Element::fromBits(ElementType t, std::uint64_t bits)
{
    switch (t) {
    case ElementType::U32: return u32(static_cast<std::uint32_t>(bits));
    case ElementType::U64: return u64(bits);
    case ElementType::F32: return f32(std::bit_cast<float>(static_cast<std::uint32_t>(bits)));
    case ElementType::DOUBLE: return f64(std::bit_cast<double>(bits));
    }
    return f64(0.0);
}

double Element::toDouble() const noexcept
{
    return std::visit([](auto v) { return static_cast<double>(v); }, payload_);
}

std::uint64_t Element::bits() const noexcept
{
    return std::visit(
        [](auto v) -> std::uint64_t {
            using T = decltype(v);
            if constexpr (std::is_same_v<T, float>) {
                return std::bit_cast<std::uint32_t>(v);
            } else if constexpr (std::is_same_v<T, double>) {
                return std::bit_cast<std::uint64_t>(v);
            } else {
                return v;
            }
        },
        payload_);
}

bool operator==(const Element& a, const Element& b)
{
    if (a.type() != b.type()) {
        throw Error(ErrorCode::TypeMismatch, "cannot compare " + std::string(elementTypeName(a.type())) + " with " +
                                                  std::string(elementTypeName(b.type())));
    }
    return a.bits() == b.bits();
}

std::string formatPayload(const Element& e)
{
    std::ostringstream os;
    switch (e.type()) {
    case ElementType::U32: os << e.as<std::uint32_t>(); break;
    case ElementType::U64: os << e.as<std::uint64_t>(); break;
    case ElementType::F32: os << std::setprecision(9) << e.as<float>(); break;
    case ElementType::DOUBLE: os << std::setprecision(17) << e.as<double>(); break;
    }
    return os.str();
}

Element parsePayload(ElementType t, std::string_view text)
{
    std::string s(text);
    try {
        std::size_t used = 0;
        Element e;
        switch (t) {
        case ElementType::U32: {
            auto v = std::stoull(s, &used);
            if (v > std::numeric_limits<std::uint32_t>::max()) {
                throw std::out_of_range("u32");
            }
            e = Element::u32(static_cast<std::uint32_t>(v));
            break;
        }
        case ElementType::U64: e = Element::u64(std::stoull(s, &used)); break;
        case ElementType::F32: e = Element::f32(std::stof(s, &used)); break;
        case ElementType::DOUBLE: e = Element::f64(std::stod(s, &used)); break;
        }
        if (used != s.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return e;
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::ParseError, "'" + s + "' is not a valid " + std::string(elementTypeName(t)));
    }
}

std::ostream& operator<<(std::ostream& os, const Element& e)
{
    return os << elementTypeName(e.type()) << ':' << formatPayload(e);
}

std::string_view memoryClassName(MemoryClass m) noexcept
{
    return m == MemoryClass::ON_CHIP ? "ON_CHIP" : "OFF_CHIP";
}

std::string_view runModeName(RunMode m) noexcept
{
    return m == RunMode::ANALYSIS ? "analysis" : "release";
}

std::string_view lifecycleName(KernelLifecycle s) noexcept
{
    switch (s) {
    case KernelLifecycle::PENDING: return "PENDING";
    case KernelLifecycle::READY: return "READY";
    case KernelLifecycle::CONFIGURED: return "CONFIGURED";
    case KernelLifecycle::RUNNING: return "RUNNING";
    case KernelLifecycle::FINISHED: return "FINISHED";
    }
    return "?";
}

void LifecycleTracker::advance(KernelLifecycle next)
{
    if (next <= state()) {
        throw Error(ErrorCode::IllegalState, "lifecycle cannot move from " + std::string(lifecycleName(state())) +
                                                 " to " + std::string(lifecycleName(next)));
    }
    history_.push_back(next);
}

bool isMonotoneLifecycle(const std::vector<KernelLifecycle>& seq) noexcept
{
    for (std::size_t i = 1; i < seq.size(); ++i) {
        if (seq[i] <= seq[i - 1]) {
            return false;
        }
    }
    return true;
}

} // namespace redsharc
