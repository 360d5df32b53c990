// ============================================================================
// homog/tensor.hpp
//
// The 2x2 effective diffusivity tensor D_eff together with solver
// diagnostics.  For positive block diffusivities D_eff is symmetric positive
// definite, its eigenvalues lie between the harmonic and arithmetic means of
// the medium (and hence within [min D, max D]), and its eigenvectors are the
// principal directions of diffusion.
// ============================================================================
#pragma once

namespace homog {

struct EffectiveTensor {
    // Entries [D_eff]_{rc}, 1-based subscripts in the names.
    double d11 = 0.0, d12 = 0.0, d21 = 0.0, d22 = 0.0;
    // 2-norms of the linear-system residuals A x - b for the two cell problems.
    double residual_norm_x = 0.0, residual_norm_y = 0.0;
    // Wall-clock seconds for assemble + factorize + solve + tensor evaluation.
    double wall_time_s = 0.0;
};

}  // namespace homog
