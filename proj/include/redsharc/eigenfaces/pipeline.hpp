#pragma once

#include "redsharc/control.hpp"
#include "redsharc/dfg.hpp"
#include "redsharc/eigenfaces/dataset.hpp"
#include "redsharc/eigenfaces/linalg.hpp"
#include "redsharc/kernel_api.hpp"
#include "redsharc/system.hpp"

#include <memory>
#include <optional>

namespace redsharc::eigenfaces {

struct PipelineParams {
    /// Training images.
    std::size_t M = 0;
    /// Pixels per image.
    std::size_t N = 0;
    /// Samples to classify.
    std::size_t S = 0;
    /// Retained components.
    std::size_t k = 0;

    std::size_t totalImages() const noexcept { return M + S; }
};

/// Default component count: min(M - 1, 8), at least 1.
std::size_t defaultComponents(std::size_t trainingImages) noexcept;

namespace kernel_ids {
inline constexpr KernelId source{1};
inline constexpr KernelId mean{2};
inline constexpr KernelId prepare{3};
inline constexpr KernelId subtract{4};
inline constexpr KernelId project{5};
inline constexpr KernelId match{6};
} // namespace kernel_ids

/// Six-kernel face recognition graph.
///
///   1 source   (SW)  pixels of training images -> 2; whole dataset block -> 3
///   2 mean     (SW)  mean image, repeated once per image -> 4
///   3 prepare  (HW)  copies the dataset into the block read by 4
///   4 subtract (SW)  image minus mean, pixel by pixel -> 5
///   5 project  (HW)  SVD basis; reference features block and sample features stream -> 6
///   6 match    (SW)  terminal streams: closest reference index, RMS distance
struct EigenfacesApp {
    dfg::Dfg graph;
    PipelineParams params;
    /// Subject id of every training image, in stream order.
    std::vector<std::uint32_t> referenceSubjects;
};

inline constexpr std::uint32_t kPrepareArea = 40;
inline constexpr std::uint32_t kProjectArea = 60;

/// Registers the six implementations (names prefixed "EF_") and builds the graph.
EigenfacesApp buildEigenfacesDfg(const Dataset& dataset, kernelapi::KernelRegistry& registry,
                                 std::optional<std::size_t> k = std::nullopt);

/// Reads the match kernel's terminal outputs back into results.
std::vector<MatchResult> pipelineResults(const control::RunReport& report, const EigenfacesApp& app);

/// The same computation, straight-line, without the runtime.
std::vector<MatchResult> sequentialOracle(const Dataset& dataset, std::optional<std::size_t> k = std::nullopt);

/// Two processors and one fabric slot large enough for both hardware kernels.
sysio::SystemConfig defaultEigenfacesConfig();

} // namespace redsharc::eigenfaces
