#pragma once

#include "redsharc/core.hpp"
#include "redsharc/dfg.hpp"

#include <coroutine>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace redsharc::kernelapi {

enum class ImplKind : std::uint8_t { SW, HW };

std::string_view implKindName(ImplKind k) noexcept;

/// Coroutine handle type for kernel bodies. A body is resumed by the engine
/// one step at a time and suspends at blocking stream calls and yields.
class KernelTask {
public:
    struct promise_type {
        std::exception_ptr error;

        KernelTask get_return_object() { return KernelTask(std::coroutine_handle<promise_type>::from_promise(*this)); }
        std::suspend_always initial_suspend() noexcept { return {}; }
        std::suspend_always final_suspend() noexcept { return {}; }
        void return_void() noexcept {}
        void unhandled_exception() noexcept { error = std::current_exception(); }
    };

    KernelTask() = default;
    KernelTask(KernelTask&& other) noexcept : handle_(std::exchange(other.handle_, {})) {}
    KernelTask& operator=(KernelTask&& other) noexcept;
    KernelTask(const KernelTask&) = delete;
    KernelTask& operator=(const KernelTask&) = delete;
    ~KernelTask();

    bool valid() const noexcept { return static_cast<bool>(handle_); }
    bool done() const noexcept { return !handle_ || handle_.done(); }
    /// Runs the body until its next suspension point.
    void resume();
    /// Exception that escaped the body, if any.
    std::exception_ptr error() const noexcept { return handle_ ? handle_.promise().error : nullptr; }

private:
    explicit KernelTask(std::coroutine_handle<promise_type> h) : handle_(h) {}

    std::coroutine_handle<promise_type> handle_;
};

/// Per-kernel resources, each array in input-then-output port order.
struct TaskData {
    KernelId handle;
    std::vector<BlockId> blocks;
    std::vector<StreamId> streams;
};

/// What a kernel knows about one of its ports.
struct PortInfo {
    dfg::EdgeKind kind = dfg::EdgeKind::STREAM;
    ElementType elemType = ElementType::DOUBLE;
    std::size_t length = 0;
    /// Position in TaskData::blocks or TaskData::streams.
    std::size_t slot = 0;
};

/// Operations a task body reaches through its context. Implemented by the
/// control kernel, which owns the networks and the recorder.
class KernelServices {
public:
    virtual ~KernelServices() = default;

    virtual bool tryPush(KernelId k, StreamId s, const Element& e) = 0;
    virtual std::optional<Element> tryPop(KernelId k, StreamId s) = 0;
    virtual std::optional<Element> tryPeek(KernelId k, StreamId s) = 0;
    /// The task is about to suspend on `s`.
    virtual void stalled(KernelId k, StreamId s) = 0;
    virtual Element blockRead(KernelId k, BlockId b, std::size_t index) = 0;
    virtual void blockWrite(KernelId k, BlockId b, std::size_t index, const Element& e) = 0;
    virtual void kernelFinished(KernelId k) = 0;
};

/// Why a suspended task is waiting.
struct WaitCondition {
    enum class Kind : std::uint8_t { NONE, DATA, SPACE, YIELD };

    Kind kind = Kind::NONE;
    StreamId stream;
};

/// The kernel-side view of the runtime: element and block operations plus finish
/// notification, cooperative yield and the debug status value.
class TaskContext {
public:
    TaskContext(TaskData data, std::vector<PortInfo> inputs, std::vector<PortInfo> outputs, KernelServices& services);

    const TaskData& data() const noexcept { return data_; }
    KernelId handle() const noexcept { return data_.handle; }

    std::size_t numInputs() const noexcept { return inputs_.size(); }
    std::size_t numOutputs() const noexcept { return outputs_.size(); }
    const PortInfo& input(PortIndex p) const;
    const PortInfo& output(PortIndex p) const;
    StreamId inputStream(PortIndex p) const;
    StreamId outputStream(PortIndex p) const;
    BlockId inputBlock(PortIndex p) const;
    BlockId outputBlock(PortIndex p) const;

    struct PushAwaiter {
        TaskContext& ctx;
        StreamId stream;
        Element element;
        bool done = false;

        bool await_ready();
        void await_suspend(std::coroutine_handle<>) noexcept {}
        void await_resume();
    };

    struct PopAwaiter {
        TaskContext& ctx;
        StreamId stream;
        bool destructive = true;
        std::optional<Element> value;

        bool await_ready();
        void await_suspend(std::coroutine_handle<>) noexcept {}
        Element await_resume();
    };

    struct YieldAwaiter {
        TaskContext& ctx;

        bool await_ready() noexcept { return false; }
        void await_suspend(std::coroutine_handle<>) noexcept;
        void await_resume() noexcept {}
    };

    PushAwaiter streamPush(StreamId s, Element e) { return PushAwaiter{*this, s, e}; }
    PopAwaiter streamPop(StreamId s) { return PopAwaiter{*this, s, true, std::nullopt}; }
    PopAwaiter streamPeek(StreamId s) { return PopAwaiter{*this, s, false, std::nullopt}; }
    YieldAwaiter yieldNow() { return YieldAwaiter{*this}; }

    Element blockRead(BlockId b, std::size_t index);
    void blockWrite(BlockId b, std::size_t index, const Element& e);

    /// Must be the body's last runtime call. A second call throws ALREADY_FINISHED.
    void notifyKernelFinished();
    bool finished() const noexcept { return finished_; }

    /// Kernel-defined value exposed through the status register (24 bits).
    void setDebugValue(std::uint32_t v) noexcept { debugValue_ = v & 0xFFFFFFu; }
    std::uint32_t debugValue() const noexcept { return debugValue_; }

    const WaitCondition& wait() const noexcept { return wait_; }
    void clearWait() noexcept { wait_ = {}; }

private:
    void requireActive() const;

    TaskData data_;
    std::vector<PortInfo> inputs_;
    std::vector<PortInfo> outputs_;
    KernelServices& services_;
    WaitCondition wait_;
    bool finished_ = false;
    std::uint32_t debugValue_ = 0;
};

using KernelBody = std::function<KernelTask(TaskContext&)>;

struct KernelImpl {
    std::string name;
    ImplKind kind = ImplKind::SW;
    /// Fabric area occupied when placed on a slot; ignored for SW.
    std::uint32_t area = 0;
    KernelBody body;
};

/// Resolves implementation names used in the DFG to kernel bodies.
/// Filled before a run and read-only while it executes.
class KernelRegistry {
public:
    /// Returns the implRef to use in initKernel. Throws DUPLICATE_NAME.
    std::string registerKernelImpl(KernelImpl impl);
    std::string registerKernelImpl(std::string name, ImplKind kind, KernelBody body, std::uint32_t area = 0);

    bool contains(const std::string& name) const noexcept { return impls_.count(name) != 0; }
    const KernelImpl& at(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, KernelImpl> impls_;
};

std::vector<dfg::Diagnostic> validateDfg(const dfg::Dfg& g, const KernelRegistry& registry);

// ----------------------------------------------------------------------------
// Hardware control registers
// ----------------------------------------------------------------------------

enum class ControlRegister : std::uint8_t { START, STOP, RESET };

std::string_view controlRegisterName(ControlRegister r) noexcept;

inline constexpr std::uint32_t kStatusHaltedBit = 1u << 3;

/// bits[2:0] lifecycle, bit 3 halted, bits[31:8] kernel debug value.
std::uint32_t encodeStatus(KernelLifecycle state, bool halted, std::uint32_t debugValue) noexcept;
KernelLifecycle statusLifecycle(std::uint32_t status) noexcept;
bool statusHalted(std::uint32_t status) noexcept;
std::uint32_t statusDebugValue(std::uint32_t status) noexcept;

// ----------------------------------------------------------------------------
// Standard kernels
// ----------------------------------------------------------------------------

/// Index-lockstep body shared by the standard kernels. For each index i it
/// takes element i from every input that has one, then emits
/// (sum of those inputs) + i + 1 on every output that has an index i.
/// Block inputs are read and block outputs written at index i.
KernelTask lockstepBody(TaskContext& ctx);

/// Registers SRC, SINK, RELAY (software) and HWSRC, HWSINK, HWRELAY
/// (hardware, area 10). All six share lockstepBody.
void registerStandardKernels(KernelRegistry& registry, std::uint32_t hwArea = 10);

} // namespace redsharc::kernelapi
