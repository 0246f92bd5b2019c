#pragma once

#include "redsharc/bsn.hpp"
#include "redsharc/core.hpp"
#include "redsharc/perfmon.hpp"
#include "redsharc/ssn.hpp"

#include <string>
#include <vector>

namespace redsharc::sysio {

enum class CoreKind : std::uint8_t { PROCESSOR, FABRIC_SLOT };

std::string_view coreKindName(CoreKind k) noexcept;

struct CoreSpec {
    CoreId id;
    CoreKind kind = CoreKind::PROCESSOR;
    // processor
    std::uint32_t dmaChannels = 0;
    std::uint32_t maxResident = 0;
    // fabric slot
    std::uint32_t area = 0;
    std::uint32_t streamPorts = 0;
    std::uint32_t blockPorts = 0;

    /// Physical stream endpoints: DMA channels on a processor, stream ports on a slot.
    std::uint32_t streamPortCount() const noexcept { return kind == CoreKind::PROCESSOR ? dmaChannels : streamPorts; }

    friend bool operator==(const CoreSpec&, const CoreSpec&) = default;
};

struct MemorySpec {
    std::size_t onChipWords = 0;
    std::size_t offChipWords = 0;

    friend bool operator==(const MemorySpec&, const MemorySpec&) = default;
};

struct SystemConfig {
    std::vector<CoreSpec> cores;
    MemorySpec memory;
    std::size_t defaultStreamDepth = 16;
    perfmon::CostModel costModel;
    std::size_t ssnStreamSlots = 64;
    /// Share one physical port among excess logical streams.
    bool interleaving = true;

    const CoreSpec* find(CoreId id) const noexcept;

    friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

/// Parses the JSON system description. Malformed JSON raises PARSE_ERROR
/// with the line number; schema violations raise SEMANTIC_ERROR.
SystemConfig parseConfig(const std::string& text);
std::string renderConfig(const SystemConfig& cfg);
SystemConfig loadConfig(const std::string& path);

/// A kernel placed on a core. Finished hardware kernels stay resident on
/// their slot until their area is reclaimed.
struct Resident {
    KernelId kernel;
    std::string impl;
    std::uint32_t area = 0;
    bool finished = false;
};

/// Live occupancy of one core.
class CoreState {
public:
    explicit CoreState(CoreSpec spec);

    const CoreSpec& spec() const noexcept { return spec_; }
    CoreId id() const noexcept { return spec_.id; }

    const std::vector<Resident>& residents() const noexcept { return residents_; }
    std::vector<Resident>& residents() noexcept { return residents_; }
    const Resident* resident(KernelId k) const noexcept;
    Resident* resident(KernelId k) noexcept;

    /// Residents that have not finished.
    std::uint32_t activeCount() const noexcept;
    /// Area held by every resident, finished or not.
    std::uint32_t occupiedArea() const noexcept;
    /// Area held by unfinished residents only.
    std::uint32_t activeArea() const noexcept;
    /// Free residency for a processor; unlimited slots report UINT32_MAX.
    std::uint32_t freeResidency() const noexcept;

    std::uint32_t freeStreamPorts() const noexcept;
    std::uint32_t freeBlockPorts() const noexcept;
    /// Claims the lowest `n` free ports. Throws PORT_LIMIT if fewer are free.
    std::vector<PortIndex> claimStreamPorts(std::uint32_t n);
    std::vector<PortIndex> claimBlockPorts(std::uint32_t n);
    void releaseStreamPorts(const std::vector<PortIndex>& ports) noexcept;
    void releaseBlockPorts(const std::vector<PortIndex>& ports) noexcept;

private:
    CoreSpec spec_;
    std::vector<Resident> residents_;
    std::vector<bool> streamPortUsed_;
    std::vector<bool> blockPortUsed_;
};

/// A generated system: the networks, memory pools and cores described by a config.
class System {
public:
    explicit System(SystemConfig cfg);

    const SystemConfig& config() const noexcept { return config_; }
    ssn::Ssn& ssn() noexcept { return ssn_; }
    const ssn::Ssn& ssn() const noexcept { return ssn_; }
    bsn::Bsn& bsn() noexcept { return bsn_; }
    const bsn::Bsn& bsn() const noexcept { return bsn_; }
    std::vector<CoreState>& cores() noexcept { return cores_; }
    const std::vector<CoreState>& cores() const noexcept { return cores_; }
    CoreState& core(CoreId id);
    const CoreState& core(CoreId id) const;

private:
    SystemConfig config_;
    ssn::Ssn ssn_;
    bsn::Bsn bsn_;
    std::vector<CoreState> cores_;
};

System generateSystem(const SystemConfig& cfg);

} // namespace redsharc::sysio
