#pragma once

#include "redsharc/core.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace redsharc::perfmon {

enum class EventKind : std::uint8_t {
    PUSH,
    POP,
    PEEK,
    BLOCK_READ,
    BLOCK_WRITE,
    STALL,
    CONTEXT_SWITCH,
    RECONFIG,
    LAUNCH,
    FINISH,
    FREE,
    CONFIGURE,
};

inline constexpr std::size_t kEventKindCount = 12;

std::string_view eventKindName(EventKind k) noexcept;
std::optional<EventKind> parseEventKind(std::string_view name) noexcept;

/// Logical-time latency of each instrumented operation.
struct CostModel {
    std::uint64_t push = 1;
    std::uint64_t pop = 1;
    std::uint64_t peek = 1;
    std::uint64_t blockOnChip = 1;
    std::uint64_t blockOffChip = 10;
    std::uint64_t stall = 0;
    std::uint64_t contextSwitch = 5;
    std::uint64_t reconfig = 1000;
    std::uint64_t launch = 0;
    std::uint64_t finish = 0;
    std::uint64_t free = 0;
    std::uint64_t configure = 0;

    std::uint64_t latency(EventKind kind, std::optional<MemoryClass> mem = std::nullopt) const noexcept;

    friend bool operator==(const CostModel&, const CostModel&) = default;
};

/// Resource references render as "stream:<id>", "block:<id>" or "core:<id>".
std::string resourceName(StreamId s);
std::string resourceName(BlockId b);
std::string resourceName(CoreId c);

struct TraceEvent {
    std::uint64_t seq = 0;
    std::uint64_t time = 0;
    EventKind kind = EventKind::PUSH;
    std::optional<KernelId> kernel;
    std::optional<std::string> resource;
    std::string detail;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct CounterSnapshot {
    std::array<std::uint64_t, kEventKindCount> totals{};
    /// resource name -> kind -> count
    std::map<std::string, std::map<EventKind, std::uint64_t>> perResource;
    std::map<KernelId, std::map<EventKind, std::uint64_t>> perKernel;
    std::uint64_t time = 0;

    std::uint64_t count(EventKind k) const noexcept { return totals[static_cast<std::size_t>(k)]; }
    std::uint64_t count(const std::string& resource, EventKind k) const;
    bool allZero() const noexcept;
};

/// Event recorder. In RELEASE mode every call is a no-op.
class Recorder {
public:
    explicit Recorder(RunMode mode, CostModel costs = {});

    RunMode mode() const noexcept { return mode_; }
    const CostModel& costs() const noexcept { return costs_; }

    void record(EventKind kind, std::optional<KernelId> kernel, std::optional<std::string> resource,
                std::string detail = {}, std::optional<MemoryClass> mem = std::nullopt);

    std::uint64_t now() const noexcept { return clock_; }
    const std::vector<TraceEvent>& trace() const noexcept { return trace_; }
    CounterSnapshot snapshotCounters() const;

private:
    RunMode mode_;
    CostModel costs_;
    std::uint64_t clock_ = 0;
    std::uint64_t nextSeq_ = 0;
    std::vector<TraceEvent> trace_;
    CounterSnapshot counters_;
};

enum class TraceFormat { JSONL, CSV };

void exportTrace(std::ostream& sink, const std::vector<TraceEvent>& trace, TraceFormat format);
void exportTrace(const std::string& path, const std::vector<TraceEvent>& trace, TraceFormat format);
std::vector<TraceEvent> parseTrace(std::istream& source, TraceFormat format);

} // namespace redsharc::perfmon
