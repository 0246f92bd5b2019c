#pragma once

#include "redsharc/control.hpp"
#include "redsharc/dfg.hpp"
#include "redsharc/kernel_api.hpp"
#include "redsharc/system.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fixtures {

using namespace redsharc;

sysio::CoreSpec processor(std::uint32_t id, std::uint32_t dma = 4, std::uint32_t maxResident = 4);
sysio::CoreSpec slot(std::uint32_t id, std::uint32_t area = 100, std::uint32_t streamPorts = 4,
                     std::uint32_t blockPorts = 4);
sysio::SystemConfig config(std::vector<sysio::CoreSpec> cores, std::size_t onChip = 16384,
                           std::size_t offChip = 1048576);

/// Registry holding the standard SRC/SINK/RELAY kernels and their HW twins.
kernelapi::KernelRegistry standardRegistry();

/// SRC(1) -stream-> RELAY(2) -stream-> SINK(3), `length` elements each hop.
dfg::Dfg streamChain(std::size_t length, bool hardwareMiddle = false);
/// Two RELAY kernels feeding each other: never schedulable on a single slot of residency.
dfg::Dfg relayCycle();

/// Run with placement maps kept for auditing.
struct AuditedRun {
    control::RunReport report;
    std::map<std::string, std::vector<KernelId>> endpoints; // resource -> producer + consumers
    std::map<std::string, KernelId> blockProducer;          // block resource -> producer
    std::map<KernelId, std::vector<KernelId>> blockProducersOf;
    bool timedOut = false;
};

AuditedRun runAudited(const sysio::SystemConfig& cfg, const dfg::Dfg& g, const kernelapi::KernelRegistry& registry,
                      const control::SchedulingPolicy& policy, control::RunOptions options = {},
                      std::chrono::milliseconds watchdog = std::chrono::seconds(10));

/// Every scheduling and lifecycle rule checked against the trace.
/// Returns one line per violation.
std::vector<std::string> auditTrace(const AuditedRun& run, const sysio::SystemConfig& cfg);

/// Random graph of standard kernels; HW kernels only when `allowHw`.
dfg::Dfg randomDfg(std::uint64_t seed, std::size_t maxKernels, bool allowHw);
sysio::SystemConfig randomConfig(std::uint64_t seed);

} // namespace fixtures
