#pragma once

#include <span>
#include <string>

#include "facelm/dataset.hpp"
#include "facelm/nn/history.hpp"
#include "facelm/stats.hpp"
#include "facelm/svg.hpp"

namespace facelm {

// Mark classes carried by every point of a landmark boxplot. Tests and
// downstream tooling key on these names.
inline constexpr std::string_view kMarkQuartileClass = "mark mark-quartile";
inline constexpr std::string_view kMarkWhiskerClass = "mark mark-whisker";
inline constexpr std::string_view kMarkOutlierClass = "mark mark-outlier";

/// Every (sample, landmark) position of one emotion in a single chart:
/// filled circle inside the quartile box, hollow circle inside the whiskers,
/// cross for outliers. Throws on an empty point set.
SvgDocument render_landmark_boxplot(const LandmarkStatsTable& table,
                                    std::span<const LandmarkPosition> points);

enum class DistributionChart { Bar, Pie };

SvgDocument render_distribution(const DistributionSummary& summary, DistributionChart kind);

/// Loss and accuracy panels, each with train and test series.
SvgDocument render_learning_curves(const nn::TrainingHistory& history, std::string_view title);

/// `<emotion>_<mode>_boxplot.svg`
std::string boxplot_file_name(Emotion emotion, FeatureMode mode);

}  // namespace facelm
