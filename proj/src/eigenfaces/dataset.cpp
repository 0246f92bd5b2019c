#include "redsharc/eigenfaces/dataset.hpp"

#include "redsharc/core.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace redsharc::eigenfaces {

std::size_t Dataset::trainingImages() const noexcept
{
    std::size_t n = 0;
    for (const auto& s : subjects) {
        n += s.images.size();
    }
    return n;
}

void checkDataset(const Dataset& d)
{
    auto bad = [](const std::string& msg) { throw Error(ErrorCode::SemanticError, "dataset: " + msg); };
    if (d.width == 0 || d.height == 0) {
        bad("width and height must be positive");
    }
    if (d.subjects.empty()) {
        bad("no subjects");
    }
    std::set<std::uint32_t> ids;
    for (const auto& s : d.subjects) {
        if (!ids.insert(s.id).second) {
            bad("duplicate subject id " + std::to_string(s.id));
        }
        if (s.images.empty()) {
            bad("subject " + std::to_string(s.id) + " has no images");
        }
        for (const auto& img : s.images) {
            if (img.size() != d.pixels()) {
                bad("subject " + std::to_string(s.id) + " has an image of " + std::to_string(img.size()) +
                    " pixels, expected " + std::to_string(d.pixels()));
            }
        }
    }
    if (d.trainingImages() < 2) {
        bad("at least two training images are needed");
    }
    if (d.samples.empty()) {
        bad("no samples");
    }
    for (const auto& img : d.samples) {
        if (img.size() != d.pixels()) {
            bad("a sample has " + std::to_string(img.size()) + " pixels, expected " + std::to_string(d.pixels()));
        }
    }
    if (!d.sampleSubjects.empty() && d.sampleSubjects.size() != d.samples.size()) {
        bad("sampleSubjects must list one subject per sample");
    }
    auto finite = [](const std::vector<double>& img) {
        return std::all_of(img.begin(), img.end(), [](double x) { return std::isfinite(x); });
    };
    for (const auto& s : d.subjects) {
        if (!std::all_of(s.images.begin(), s.images.end(), finite)) {
            bad("non-finite pixel in subject " + std::to_string(s.id));
        }
    }
    if (!std::all_of(d.samples.begin(), d.samples.end(), finite)) {
        bad("non-finite pixel in a sample");
    }
}

Dataset generateSyntheticDataset(std::uint64_t seed, std::uint32_t subjects, std::uint32_t imagesPerSubject,
                                 std::uint32_t width, std::uint32_t height, std::optional<std::uint32_t> samples)
{
    if (subjects == 0 || imagesPerSubject == 0 || width == 0 || height == 0 || (samples && *samples == 0)) {
        throw Error(ErrorCode::InvalidArgument, "dataset parameters must be positive");
    }
    std::mt19937_64 rng(seed);
    // 53 random bits mapped to [0, 1); spelled out so datasets match across standard libraries.
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1p-53; };

    Dataset d;
    d.width = width;
    d.height = height;
    const std::size_t n = d.pixels();
    std::vector<std::vector<double>> bases(subjects, std::vector<double>(n));
    std::vector<double> amplitude(subjects);
    for (std::uint32_t s = 0; s < subjects; ++s) {
        for (auto& px : bases[s]) {
            px = uniform();
        }
        auto [lo, hi] = std::minmax_element(bases[s].begin(), bases[s].end());
        amplitude[s] = *hi - *lo;
    }
    auto perturbed = [&](std::uint32_t s) {
        std::vector<double> img = bases[s];
        for (auto& px : img) {
            px += (2.0 * uniform() - 1.0) * 0.05 * amplitude[s];
        }
        return img;
    };
    for (std::uint32_t s = 0; s < subjects; ++s) {
        Subject subj{s, {}};
        for (std::uint32_t i = 0; i < imagesPerSubject; ++i) {
            subj.images.push_back(perturbed(s));
        }
        d.subjects.push_back(std::move(subj));
    }
    const std::uint32_t count = samples.value_or(subjects);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t s = i % subjects;
        d.samples.push_back(i % 2 == 0 ? bases[s] : perturbed(s));
        d.sampleSubjects.push_back(s);
    }
    return d;
}

Dataset parseDataset(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("dataset: ") + e.what());
    }
    Dataset d;
    try {
        d.width = doc.at("width").get<std::uint32_t>();
        d.height = doc.at("height").get<std::uint32_t>();
        for (const auto& s : doc.at("subjects")) {
            d.subjects.push_back({s.at("id").get<std::uint32_t>(), s.at("images").get<std::vector<std::vector<double>>>()});
        }
        d.samples = doc.at("samples").get<std::vector<std::vector<double>>>();
        if (doc.contains("sampleSubjects")) {
            d.sampleSubjects = doc.at("sampleSubjects").get<std::vector<std::uint32_t>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SemanticError, std::string("dataset: ") + e.what());
    }
    checkDataset(d);
    return d;
}

std::string renderDataset(const Dataset& d)
{
    nlohmann::ordered_json doc;
    doc["width"] = d.width;
    doc["height"] = d.height;
    doc["subjects"] = nlohmann::ordered_json::array();
    for (const auto& s : d.subjects) {
        doc["subjects"].push_back({{"id", s.id}, {"images", s.images}});
    }
    doc["samples"] = d.samples;
    if (!d.sampleSubjects.empty()) {
        doc["sampleSubjects"] = d.sampleSubjects;
    }
    return doc.dump() + "\n";
}

Dataset loadDataset(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot read dataset '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parseDataset(ss.str());
}

} // namespace redsharc::eigenfaces
