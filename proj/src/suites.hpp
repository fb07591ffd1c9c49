#pragma once

#include "divfree/experiment.hpp"

namespace divfree::suites {

EstimateReport manufactured(const ExperimentConfig& cfg);
EstimateReport well_posedness(const ExperimentConfig& cfg);
EstimateReport rough_c_ladder(const ExperimentConfig& cfg);
EstimateReport divfree(const ExperimentConfig& cfg);
EstimateReport transformation(const ExperimentConfig& cfg);
EstimateReport interpolation(const ExperimentConfig& cfg);
EstimateReport max_principle(const ExperimentConfig& cfg);
EstimateReport duality(const ExperimentConfig& cfg);
EstimateReport exponents(const ExperimentConfig& cfg);

}  // namespace divfree::suites
