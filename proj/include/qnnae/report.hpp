// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "qnnae/evaluation.hpp"

namespace qnnae::report {

/// Header line of the architecture CSV.
inline constexpr const char* kCsvHeader =
    "hidden,score_p0,mean_accuracy,min,max,stddev,num_samples,excluded,seed";

/// Header plus one row per report. Reals use fixed notation with 10 digits.
void write_csv(std::ostream& out, std::span<const evaluation::ArchitectureReport> reports);

/// One line per retained network: its performance bits. The output is itself
/// a valid pattern-memory file.
void write_performance_matrix(std::ostream& out, const evaluation::ArchitectureReport& report);

struct PlotOptions {
  std::string title = "Architecture performance vs. P(c=0)";
  int width = 640;
  int height = 480;
};

/// Scatter of mean accuracy (x) against score (y), one circle per report,
/// labeled with the hidden-neuron count.
void write_scatter_svg(std::ostream& out, std::span<const evaluation::ArchitectureReport> reports,
                       const PlotOptions& options = {});

}  // namespace qnnae::report
