// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit
//
// Triple parametric decomposition of multi-snapshot UPA observations.
// Step 1 multiplies origin-symmetric antenna pairs and averages over
// snapshots, cancelling the distance-related quadratic phase exactly under
// the Fresnel model while doubling the angular frequency. Step 2 forms
// horizontally / vertically symmetric sums that isolate the elevation and
// azimuth directional cosines in the phase. Step 3 multiplies every entry
// with the (compensated) center reference, retaining both the linear and
// quadratic terms for 1D distance estimation.

#pragma once

#include <string>

#include "nftk/channel.hpp"
#include "nftk/common.hpp"
#include "nftk/geometry.hpp"

namespace nftk {

struct TpdSequences {
  MatC step1;       // x(m,n), indexed (p, q) like the snapshot layout
  MatC step2_elev;  // s(m,n) = x(m,n) + x(-m,n); phase carries v only
  MatC step2_azim;  // t(m,n) = x(m,n) + x(m,-n); phase carries u only
  MatC step3;       // c(m,n), center-referenced product sequence
  int snapshots_used = 0;
};

/// x(m,n) = (1/T) sum_t h_t(m,n) conj(h_t(-m,-n)). For odd x odd arrays the
/// (0,0) self-product carries a +sigma^2 bias which is subtracted using the
/// snapshot set's noise variance.
MatC step1_angular_product(const SnapshotSet& snapshots, const ArrayGeometry& geom);

/// Exact linear images s(m,n) = x(m,n) + x(-m,n), t(m,n) = x(m,n) + x(m,-n).
void step2_decompose(const MatC& step1, MatC& step2_elev, MatC& step2_azim);

/// c(m,n) = (1/T) sum_t h_t(m,n) conj(h_t(ref)); ref is the center element
/// for odd x odd arrays and the element nearest the center (ties toward
/// positive indices) otherwise. The ref self-product noise bias is removed.
MatC step3_center_product(const SnapshotSet& snapshots, const ArrayGeometry& geom);

/// Reference element of step 3 for this geometry (smallest |m| + |n|, ties
/// broken toward positive indices).
AntennaIndex step3_reference(const ArrayGeometry& geom);

/// All four sequences in one pass.
TpdSequences decompose(const SnapshotSet& snapshots, const ArrayGeometry& geom);

/// Analytic expectation of step 1 under the Fresnel model:
/// sum_l P_l exp(j 2 k d (m u_l + n v_l)).
MatC ideal_step1(const ArrayGeometry& geom, const std::vector<Scatterer>& scatterers);

/// Analytic expectation of step 3: sum_l P_l a_l(m,n) conj(a_l(ref)) with
/// a_l the Fresnel response of scatterer l.
MatC ideal_step3(const ArrayGeometry& geom, const std::vector<Scatterer>& scatterers);

/// Noise floor estimate from data: mean of the noise-subspace eigenvalues
/// (all but the signal_rank largest) of the sample covariance over the
/// min(N, T/2) antennas nearest the array center. Alternative to the
/// configured-SNR oracle carried by SnapshotSet.
double estimate_noise_floor(const SnapshotSet& snapshots, const ArrayGeometry& geom,
                            int signal_rank);

/// Writes <prefix>{x,s,t,c}_{mag,phase}.csv grids (rows = vertical index).
void dump_sequences_csv(const TpdSequences& seqs, const std::string& prefix);

}  // namespace nftk
