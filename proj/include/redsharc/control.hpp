#pragma once

#include "redsharc/dfg.hpp"
#include "redsharc/kernel_api.hpp"
#include "redsharc/perfmon.hpp"
#include "redsharc/system.hpp"

#include <atomic>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace redsharc::control {

// ----------------------------------------------------------------------------
// Scheduling policies
// ----------------------------------------------------------------------------

/// Remaining capacity of one core as seen by a policy.
struct CoreAvailability {
    CoreId id;
    sysio::CoreKind kind = sysio::CoreKind::PROCESSOR;
    std::uint32_t freeResidency = 0;
    /// Area not held by running kernels (finished residents are evictable).
    std::uint32_t freeArea = 0;
    std::uint32_t freeStreamPorts = 0;
    std::uint32_t freeBlockPorts = 0;
};

/// What a kernel needs from a core.
struct PlacementNeeds {
    kernelapi::ImplKind kind = kernelapi::ImplKind::SW;
    std::uint32_t area = 0;
    /// Logical stream endpoints, terminal outputs included.
    std::uint32_t streams = 0;
    std::uint32_t blocks = 0;
};

struct PlacementView {
    const dfg::Dfg* graph = nullptr;
    std::map<KernelId, PlacementNeeds> needs;
    bool interleaving = true;

    bool compatible(KernelId k, const CoreAvailability& core) const;
    bool fits(KernelId k, const CoreAvailability& core) const;
};

using Assignment = std::pair<KernelId, CoreId>;

struct SchedulingPolicy {
    std::string name;
    std::function<std::vector<Assignment>(const std::vector<KernelId>& ready, const std::vector<CoreAvailability>& cores,
                                          const PlacementView& view)>
        decide;
};

/// Ready kernels in order, each onto the lowest-id compatible core with room.
SchedulingPolicy policyFifo();
/// Fixed placement. Kernels whose core lacks room wait; unmapped kernels never run.
SchedulingPolicy policyStatic(std::map<KernelId, CoreId> placement);
/// `{"placement":[{"kernel":4,"core":1}, ...]}`
std::map<KernelId, CoreId> parseStaticPlacement(const std::string& text);

// ----------------------------------------------------------------------------
// Run options and report
// ----------------------------------------------------------------------------

enum class Outcome : std::uint8_t { COMPLETED, DEADLOCK, ERROR };

std::string_view outcomeName(Outcome o) noexcept;

struct RunOptions {
    RunMode mode = RunMode::ANALYSIS;
    /// Record every element pushed on every stream, keyed by producer port.
    bool captureStreams = false;
    /// When false, step() only dispatches tasks; launches are left to the caller.
    bool autoSchedule = true;
    /// When false, hardware kernels are placed but wait for a START write.
    bool autoStartHw = true;
};

struct RunReport {
    Outcome outcome = Outcome::COMPLETED;
    std::optional<ErrorCode> errorCode;
    std::vector<std::string> diagnostics;
    std::map<KernelId, KernelLifecycle> finalStates;
    std::map<KernelId, std::vector<KernelLifecycle>> lifecycleHistory;
    perfmon::CounterSnapshot counters;
    std::vector<perfmon::TraceEvent> trace;
    /// Terminal outputs (ports with no consumer) collected by the control kernel.
    std::map<dfg::PortRef, std::vector<Element>> outputs;
    /// Every element pushed per stream, when RunOptions::captureStreams is set.
    std::map<dfg::PortRef, std::vector<Element>> captured;
    std::uint64_t streamsCreated = 0;
    std::uint64_t streamsFreed = 0;
    std::uint64_t blocksAllocated = 0;
    std::uint64_t blocksFreed = 0;
    bsn::MemoryPools poolsAtEnd;
};

/// Ready set: kernels PENDING or READY whose block producers have all
/// FINISHED and whose stream producers are RUNNING, FINISHED or themselves
/// in the set. Ascending id.
std::vector<KernelId> computeReadySet(const dfg::Dfg& g, const std::map<KernelId, KernelLifecycle>& states);

enum class PassResult : std::uint8_t { PROGRESSED, STALLED, PAUSED, COMPLETED, FAILED };

// ----------------------------------------------------------------------------
// Control kernel
// ----------------------------------------------------------------------------

/// Orchestrates one run of a DFG on a generated system.
///
/// The engine is cooperative and deterministic. A pass schedules ready
/// kernels, then resumes every runnable task once in ascending id order.
/// step() runs one pass; run() loops until the run ends. pauseAll/resume and
/// the debug operations may be called from another thread while run() is
/// executing; they take effect between passes.
class ControlKernel : private kernelapi::KernelServices {
public:
    ControlKernel(sysio::System& sys, const dfg::Dfg& g, const kernelapi::KernelRegistry& registry,
                  SchedulingPolicy policy, RunOptions options = {});
    ~ControlKernel() override;

    ControlKernel(const ControlKernel&) = delete;
    ControlKernel& operator=(const ControlKernel&) = delete;

    /// Validates inputs and begins the run. Throws INVALID_ARGUMENT on invalid
    /// graphs and CONFIG_MISMATCH when a kernel's area or ports exceed every
    /// compatible core.
    void start();
    PassResult step();
    /// Runs to completion, deadlock or error. Blocks while paused.
    RunReport run();
    bool finished() const noexcept { return outcome_.has_value(); }
    RunReport report() const;

    // Lifecycle operations, normally driven by step().
    void refreshReadySet();
    void configureKernel(KernelId k, CoreId c);
    void launchKernel(KernelId k, CoreId c);

    KernelLifecycle state(KernelId k) const;
    std::optional<CoreId> coreOf(KernelId k) const;
    std::optional<StreamId> streamOf(dfg::PortRef producerPort) const;
    std::optional<BlockId> blockOf(dfg::PortRef producerPort) const;
    bool detectDeadlock() const;

    // Hardware control registers.
    void hwWriteControl(KernelId k, kernelapi::ControlRegister reg);
    std::uint32_t hwReadStatus(KernelId k) const;

    // Debugging.
    void pauseAll();
    void resume();
    bool paused() const;
    /// Lets a paused run() execute `passes` more passes, then returns with the
    /// run still paused. Needs run() executing on another thread.
    void advancePaused(std::size_t passes);
    /// Stops a run in progress; run() returns with outcome ERROR.
    void abort();
    std::vector<Element> debugPeekStream(StreamId s) const;
    Element debugReadBlock(BlockId b, std::size_t index) const;
    void debugWriteBlock(BlockId b, std::size_t index, const Element& e);
    /// Human-readable state of kernels, streams and blocks.
    std::string debugStatus() const;

    const perfmon::Recorder& recorder() const noexcept { return recorder_; }

private:
    struct KernelRuntime;
    struct Placement;

    // KernelServices
    bool tryPush(KernelId k, StreamId s, const Element& e) override;
    std::optional<Element> tryPop(KernelId k, StreamId s) override;
    std::optional<Element> tryPeek(KernelId k, StreamId s) override;
    void stalled(KernelId k, StreamId s) override;
    Element blockRead(KernelId k, BlockId b, std::size_t index) override;
    void blockWrite(KernelId k, BlockId b, std::size_t index, const Element& e) override;
    void kernelFinished(KernelId k) override;

    PassResult stepLocked();
    bool schedulePass();
    bool dispatchPass();
    void finalize(Outcome o);
    void fail(ErrorCode code, const std::string& message);
    void checkStarted() const;

    KernelRuntime& runtime(KernelId k);
    const KernelRuntime& runtime(KernelId k) const;
    void advance(KernelRuntime& rt, KernelLifecycle next);
    std::map<KernelId, KernelLifecycle> states() const;
    std::vector<CoreAvailability> availability() const;
    bool resourcesAvailable(KernelId k) const;
    bool runnable(const KernelRuntime& rt) const;
    void createTask(KernelRuntime& rt);
    void startTask(KernelRuntime& rt);
    void placeOnCore(KernelRuntime& rt, sysio::CoreState& core);
    void freeIncident(KernelId k);
    void drainTerminals();
    bool isFinished(KernelId k) const;
    std::string describeBlocked() const;
    std::string coreLabel(CoreId c) const;

    sysio::System& sys_;
    const dfg::Dfg& graph_;
    const kernelapi::KernelRegistry& registry_;
    SchedulingPolicy policy_;
    RunOptions options_;
    perfmon::Recorder recorder_;
    PlacementView view_;

    std::map<KernelId, std::unique_ptr<KernelRuntime>> kernels_;
    std::map<dfg::PortRef, StreamId> streams_;
    std::map<dfg::PortRef, BlockId> blocks_;
    std::map<StreamId, dfg::PortRef> streamOwner_;
    std::set<StreamId> terminalStreams_;
    std::map<dfg::PortRef, std::vector<Element>> outputs_;
    std::map<dfg::PortRef, std::vector<Element>> captured_;
    std::vector<std::string> diagnostics_;
    std::optional<ErrorCode> errorCode_;
    std::optional<Outcome> outcome_;
    bool started_ = false;

    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    bool paused_ = false;
    bool inPass_ = false;
    std::size_t grantedPasses_ = 0;
    bool aborted_ = false;
};

/// Runs `g` on `sys` to completion or deadlock and returns the report.
RunReport runSystem(sysio::System& sys, const dfg::Dfg& g, const kernelapi::KernelRegistry& registry,
                    const SchedulingPolicy& policy, RunOptions options = {});

} // namespace redsharc::control
