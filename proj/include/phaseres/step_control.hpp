#pragma once

namespace phaseres {

/// Arclength step control shared by the slow-flow and harmonic-balance continuations.
struct StepControl {
    double initial = 1e-2;
    double min = 1e-7;
    double max = 5e-2;
    double grow = 1.3;
    int fast_iterations = 4;  // grow the step when the corrector needs fewer
    int max_points = 20000;
};

}  // namespace phaseres
