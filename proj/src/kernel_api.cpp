#include "redsharc/kernel_api.hpp"

#include <algorithm>

namespace redsharc::kernelapi {

std::string_view implKindName(ImplKind k) noexcept
{
    return k == ImplKind::SW ? "SW" : "HW";
}

KernelTask& KernelTask::operator=(KernelTask&& other) noexcept
{
    if (this != &other) {
        if (handle_) {
            handle_.destroy();
        }
        handle_ = std::exchange(other.handle_, {});
    }
    return *this;
}

KernelTask::~KernelTask()
{
    if (handle_) {
        handle_.destroy();
    }
}

void KernelTask::resume()
{
    if (!done()) {
        handle_.resume();
    }
}

// ----------------------------------------------------------------------------

TaskContext::TaskContext(TaskData data, std::vector<PortInfo> inputs, std::vector<PortInfo> outputs,
                         KernelServices& services)
    : data_(std::move(data)), inputs_(std::move(inputs)), outputs_(std::move(outputs)), services_(services)
{
}

const PortInfo& TaskContext::input(PortIndex p) const
{
    if (p >= inputs_.size()) {
        throw Error(ErrorCode::PortOutOfRange, "input port " + std::to_string(p));
    }
    return inputs_[p];
}

const PortInfo& TaskContext::output(PortIndex p) const
{
    if (p >= outputs_.size()) {
        throw Error(ErrorCode::PortOutOfRange, "output port " + std::to_string(p));
    }
    return outputs_[p];
}

namespace {

void requireKind(const PortInfo& info, dfg::EdgeKind kind, const char* side, PortIndex p)
{
    if (info.kind != kind) {
        throw Error(ErrorCode::TypeMismatch, std::string(side) + " port " + std::to_string(p) + " is a " +
                                                 std::string(dfg::edgeKindName(info.kind)));
    }
}

} // namespace

StreamId TaskContext::inputStream(PortIndex p) const
{
    const auto& info = input(p);
    requireKind(info, dfg::EdgeKind::STREAM, "input", p);
    return data_.streams.at(info.slot);
}

StreamId TaskContext::outputStream(PortIndex p) const
{
    const auto& info = output(p);
    requireKind(info, dfg::EdgeKind::STREAM, "output", p);
    return data_.streams.at(info.slot);
}

BlockId TaskContext::inputBlock(PortIndex p) const
{
    const auto& info = input(p);
    requireKind(info, dfg::EdgeKind::BLOCK, "input", p);
    return data_.blocks.at(info.slot);
}

BlockId TaskContext::outputBlock(PortIndex p) const
{
    const auto& info = output(p);
    requireKind(info, dfg::EdgeKind::BLOCK, "output", p);
    return data_.blocks.at(info.slot);
}

void TaskContext::requireActive() const
{
    if (finished_) {
        throw Error(ErrorCode::KernelFinished,
                    "kernel " + std::to_string(data_.handle.value) + " already signalled completion");
    }
}

bool TaskContext::PushAwaiter::await_ready()
{
    ctx.requireActive();
    if (ctx.services_.tryPush(ctx.handle(), stream, element)) {
        done = true;
        return true;
    }
    ctx.services_.stalled(ctx.handle(), stream);
    ctx.wait_ = {WaitCondition::Kind::SPACE, stream};
    return false;
}

void TaskContext::PushAwaiter::await_resume()
{
    ctx.clearWait();
    if (!done && !ctx.services_.tryPush(ctx.handle(), stream, element)) {
        throw Error(ErrorCode::IllegalState, "woken without space on stream " + std::to_string(stream.value));
    }
}

bool TaskContext::PopAwaiter::await_ready()
{
    ctx.requireActive();
    value = destructive ? ctx.services_.tryPop(ctx.handle(), stream) : ctx.services_.tryPeek(ctx.handle(), stream);
    if (value) {
        return true;
    }
    ctx.services_.stalled(ctx.handle(), stream);
    ctx.wait_ = {WaitCondition::Kind::DATA, stream};
    return false;
}

Element TaskContext::PopAwaiter::await_resume()
{
    ctx.clearWait();
    if (!value) {
        value = destructive ? ctx.services_.tryPop(ctx.handle(), stream) : ctx.services_.tryPeek(ctx.handle(), stream);
        if (!value) {
            throw Error(ErrorCode::IllegalState, "woken without data on stream " + std::to_string(stream.value));
        }
    }
    return *value;
}

void TaskContext::YieldAwaiter::await_suspend(std::coroutine_handle<>) noexcept
{
    ctx.wait_ = {WaitCondition::Kind::YIELD, {}};
}

Element TaskContext::blockRead(BlockId b, std::size_t index)
{
    requireActive();
    return services_.blockRead(handle(), b, index);
}

void TaskContext::blockWrite(BlockId b, std::size_t index, const Element& e)
{
    requireActive();
    services_.blockWrite(handle(), b, index, e);
}

void TaskContext::notifyKernelFinished()
{
    if (finished_) {
        throw Error(ErrorCode::AlreadyFinished, "kernel " + std::to_string(data_.handle.value) + " finished twice");
    }
    finished_ = true;
    services_.kernelFinished(handle());
}

// ----------------------------------------------------------------------------

std::string KernelRegistry::registerKernelImpl(KernelImpl impl)
{
    if (impl.name.empty()) {
        throw Error(ErrorCode::InvalidArgument, "kernel implementation needs a name");
    }
    if (!impl.body) {
        throw Error(ErrorCode::InvalidArgument, "kernel implementation '" + impl.name + "' has no body");
    }
    if (impls_.count(impl.name) != 0) {
        throw Error(ErrorCode::DuplicateName, "kernel implementation '" + impl.name + "' is already registered");
    }
    auto name = impl.name;
    impls_.emplace(name, std::move(impl));
    return name;
}

std::string KernelRegistry::registerKernelImpl(std::string name, ImplKind kind, KernelBody body, std::uint32_t area)
{
    return registerKernelImpl(KernelImpl{std::move(name), kind, area, std::move(body)});
}

const KernelImpl& KernelRegistry::at(const std::string& name) const
{
    auto it = impls_.find(name);
    if (it == impls_.end()) {
        throw Error(ErrorCode::UnknownImpl, "no kernel implementation named '" + name + "'");
    }
    return it->second;
}

std::vector<std::string> KernelRegistry::names() const
{
    std::vector<std::string> out;
    for (const auto& [name, _] : impls_) {
        out.push_back(name);
    }
    return out;
}

std::vector<dfg::Diagnostic> validateDfg(const dfg::Dfg& g, const KernelRegistry& registry)
{
    return g.validate([&](const std::string& name) { return registry.contains(name); });
}

// ----------------------------------------------------------------------------

std::string_view controlRegisterName(ControlRegister r) noexcept
{
    switch (r) {
    case ControlRegister::START: return "START";
    case ControlRegister::STOP: return "STOP";
    case ControlRegister::RESET: return "RESET";
    }
    return "?";
}

std::uint32_t encodeStatus(KernelLifecycle state, bool halted, std::uint32_t debugValue) noexcept
{
    return static_cast<std::uint32_t>(state) | (halted ? kStatusHaltedBit : 0u) | ((debugValue & 0xFFFFFFu) << 8);
}

KernelLifecycle statusLifecycle(std::uint32_t status) noexcept
{
    return static_cast<KernelLifecycle>(status & 0x7u);
}

bool statusHalted(std::uint32_t status) noexcept
{
    return (status & kStatusHaltedBit) != 0;
}

std::uint32_t statusDebugValue(std::uint32_t status) noexcept
{
    return status >> 8;
}

// ----------------------------------------------------------------------------

KernelTask lockstepBody(TaskContext& ctx)
{
    std::size_t span = 0;
    for (PortIndex p = 0; p < ctx.numInputs(); ++p) {
        span = std::max(span, ctx.input(p).length);
    }
    for (PortIndex p = 0; p < ctx.numOutputs(); ++p) {
        span = std::max(span, ctx.output(p).length);
    }
    for (std::size_t i = 0; i < span; ++i) {
        double acc = 0.0;
        for (PortIndex p = 0; p < ctx.numInputs(); ++p) {
            const auto& in = ctx.input(p);
            if (i >= in.length) {
                continue;
            }
            if (in.kind == dfg::EdgeKind::STREAM) {
                acc += (co_await ctx.streamPop(ctx.inputStream(p))).toDouble();
            } else {
                acc += ctx.blockRead(ctx.inputBlock(p), i).toDouble();
            }
        }
        const double value = acc + static_cast<double>(i + 1);
        for (PortIndex p = 0; p < ctx.numOutputs(); ++p) {
            const auto& out = ctx.output(p);
            if (i >= out.length) {
                continue;
            }
            auto e = Element::fromDouble(out.elemType, value);
            if (out.kind == dfg::EdgeKind::STREAM) {
                co_await ctx.streamPush(ctx.outputStream(p), e);
            } else {
                ctx.blockWrite(ctx.outputBlock(p), i, e);
            }
        }
    }
    ctx.notifyKernelFinished();
}

void registerStandardKernels(KernelRegistry& registry, std::uint32_t hwArea)
{
    for (const char* name : {"SRC", "SINK", "RELAY"}) {
        registry.registerKernelImpl(name, ImplKind::SW, lockstepBody);
        registry.registerKernelImpl(std::string("HW") + name, ImplKind::HW, lockstepBody, hwArea);
    }
}

} // namespace redsharc::kernelapi
