#pragma once
#include <string>
#include <vector>

#include "snails/experiments.hpp"
#include "snails/neighbor.hpp"
#include "snails/observables.hpp"

namespace snails {

// Shortest round-trip decimal for a double (17 significant digits).
std::string format_real(double x);

// Write-temp-then-rename so readers never observe a partial file; parent
// directories are created as needed.
void atomic_write_file(const std::string& path, const std::string& content);

std::string run_results_csv(const std::vector<RunResult>& runs,
                            const std::vector<double>& occupation_thresholds);
std::string survival_curve_csv(const SurvivalCurve& curve);
std::string shape_quantiles_csv(const ShapeReport& report);
std::string coupling_csv(const CouplingReport& report);
std::string convergence_csv(const std::vector<ConvergenceRow>& rows, const std::string& statistic);
std::string percolation_csv(const std::vector<PercolationRow>& rows);
std::string stationarity_csv(const std::vector<StationarityRow>& rows);

// Survival curve on a log ordinate with the fitted decay line.
std::string survival_svg(const SurvivalCurve& curve, const FitResult& fit);
// Quantile fan of the sup-front envelopes over time.
std::string fan_chart_svg(const ShapeReport& report);

}  // namespace snails
