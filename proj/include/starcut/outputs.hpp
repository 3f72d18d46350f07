#pragma once

#include <filesystem>
#include <string>

#include "starcut/segmenter.hpp"

namespace starcut {

/// Writes contour.csv, mask.pgm and result.txt into `dir`. All fields are in a fixed order and
/// everything except the final `elapsed_s` line is a pure function of the inputs.
void write_segmentation(const SegmentationResult& result, const SeedInput& input, const SegmentParams& params,
                        const std::string& image_label, const std::filesystem::path& dir);

/// `ray,x,y` rows with round-trip precision.
std::string format_contour_csv(const Polygon& contour);

}  // namespace starcut
