#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace redsharc::eigenfaces {

struct Subject {
    std::uint32_t id = 0;
    /// Each image holds width*height pixels, row-major.
    std::vector<std::vector<double>> images;

    friend bool operator==(const Subject&, const Subject&) = default;
};

struct Dataset {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<Subject> subjects;
    std::vector<std::vector<double>> samples;
    /// Ground-truth subject id per sample, when known.
    std::vector<std::uint32_t> sampleSubjects;

    std::size_t pixels() const noexcept { return std::size_t{width} * height; }
    std::size_t trainingImages() const noexcept;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Throws SEMANTIC_ERROR if the dataset cannot drive the pipeline.
void checkDataset(const Dataset& d);

/// Pseudo-random base pattern per subject plus +/-5% perturbations of its
/// amplitude per image. Sample s belongs to subject s % subjects; even
/// samples are unperturbed copies of the base pattern.
Dataset generateSyntheticDataset(std::uint64_t seed, std::uint32_t subjects, std::uint32_t imagesPerSubject,
                                 std::uint32_t width, std::uint32_t height,
                                 std::optional<std::uint32_t> samples = std::nullopt);

Dataset parseDataset(const std::string& text);
std::string renderDataset(const Dataset& d);
Dataset loadDataset(const std::string& path);

} // namespace redsharc::eigenfaces
