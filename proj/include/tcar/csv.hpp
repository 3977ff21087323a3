#pragma once
// CSV writers for simulation output and pipeline diagnostics.  All numbers are
// written with 17 significant digits so files round-trip and rerun bit-identically.
#include <string>

#include "tcar/sim.hpp"

namespace tcar {

std::string fmt_full(double v);

void write_fields_csv(const std::string& path, const SimResult& r, const SpatialGrid& grid);
void write_target_csv(const std::string& path, const SimResult& r, const SpatialGrid& grid);
void write_series_csv(const std::string& path, const SimResult& r);
void write_kernel_csv(const std::string& path, const KernelSolution& ks);
void write_riemann_csv(const std::string& path, const RiemannSystem& rs);

}  // namespace tcar
