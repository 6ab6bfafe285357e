// Built with -mavx2 -ffp-contract=off; only called after a runtime CPU check.

#include <immintrin.h>

#include "ehrelay/kernels/secrecy_kernel.hpp"
#include "secrecy_point.hpp"

namespace ehrelay::kernels {

void secrecy_gain_avx2(const SecrecyConstants& k, const AllocationBatch& batch,
                       std::span<double> out) {
  batch.validate(out.size());
  const std::size_t n = batch.size();

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d c1 = _mm256_set1_pd(k.c1);
  const __m256d c2 = _mm256_set1_pd(k.c2);
  const __m256d cJ = _mm256_set1_pd(k.cJ);
  const __m256d t1 = _mm256_set1_pd(k.t1);
  const __m256d t2 = _mm256_set1_pd(k.t2);
  const __m256d tJ = _mm256_set1_pd(k.tJ);
  const __m256d w1 = _mm256_set1_pd(k.w1);
  const __m256d w2 = _mm256_set1_pd(k.w2);
  const __m256d wJ = _mm256_set1_pd(k.wJ);
  const __m256d g1 = _mm256_set1_pd(k.g1);
  const __m256d g2 = _mm256_set1_pd(k.g2);
  const __m256d G1 = _mm256_set1_pd(k.G1);
  const __m256d G2 = _mm256_set1_pd(k.G2);
  const __m256d e1sq = _mm256_set1_pd(k.e1sq);
  const __m256d e2sq = _mm256_set1_pd(k.e2sq);
  const __m256d eta = _mm256_set1_pd(k.eta);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d beta = _mm256_loadu_pd(batch.beta.data() + i);
    const __m256d p1 = _mm256_loadu_pd(batch.p1.data() + i);
    const __m256d p2 = _mm256_loadu_pd(batch.p2.data() + i);
    const __m256d pj = _mm256_loadu_pd(batch.pj.data() + i);

    const __m256d bt = _mm256_sub_pd(one, beta);
    const __m256d e1 = _mm256_mul_pd(p1, c1);
    const __m256d e2 = _mm256_mul_pd(p2, c2);
    const __m256d eJ = _mm256_mul_pd(pj, cJ);
    const __m256d r1 = _mm256_mul_pd(p1, t1);
    const __m256d r2 = _mm256_mul_pd(p2, t2);
    const __m256d rJ = _mm256_mul_pd(pj, tJ);
    const __m256d sum_true = _mm256_add_pd(_mm256_add_pd(r1, r2), rJ);
    const __m256d sum_est = _mm256_add_pd(_mm256_add_pd(e1, e2), eJ);
    const __m256d leak = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(p1, w1), _mm256_mul_pd(p2, w2)),
                                       _mm256_mul_pd(pj, wJ));

    const __m256d snr_r2 = _mm256_div_pd(
        _mm256_mul_pd(bt, r1), _mm256_add_pd(_mm256_mul_pd(bt, _mm256_add_pd(r2, rJ)), one));
    const __m256d snr_r1 = _mm256_div_pd(
        _mm256_mul_pd(bt, r2), _mm256_add_pd(_mm256_mul_pd(bt, _mm256_add_pd(r1, rJ)), one));
    const __m256d a2 = _mm256_div_pd(_mm256_mul_pd(_mm256_mul_pd(beta, eta), sum_true),
                                     _mm256_add_pd(_mm256_mul_pd(bt, sum_true), one));

    const __m256d bt_leak2 = _mm256_mul_pd(_mm256_mul_pd(bt, g2), leak);
    const __m256d bt_leak1 = _mm256_mul_pd(_mm256_mul_pd(bt, g1), leak);
    const __m256d inner2 = _mm256_add_pd(
        _mm256_add_pd(G2, _mm256_mul_pd(_mm256_mul_pd(bt, e2sq), sum_est)), bt_leak2);
    const __m256d inner1 = _mm256_add_pd(
        _mm256_add_pd(G1, _mm256_mul_pd(_mm256_mul_pd(bt, e1sq), sum_est)), bt_leak1);
    const __m256d den2 = _mm256_add_pd(one, _mm256_mul_pd(a2, inner2));
    const __m256d den1 = _mm256_add_pd(one, _mm256_mul_pd(a2, inner1));
    const __m256d snr_s2 =
        _mm256_div_pd(_mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(g2, a2), bt), e1), den2);
    const __m256d snr_s1 =
        _mm256_div_pd(_mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(g1, a2), bt), e2), den1);

    const __m256d q1 = _mm256_div_pd(_mm256_add_pd(one, snr_s1), _mm256_add_pd(one, snr_r1));
    const __m256d q2 = _mm256_div_pd(_mm256_add_pd(one, snr_s2), _mm256_add_pd(one, snr_r2));
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(_mm256_max_pd(q1, one), _mm256_max_pd(q2, one)));
  }
  for (; i < n; ++i) {
    out[i] = detail::secrecy_gain_point(k, batch.beta[i], batch.p1[i], batch.p2[i], batch.pj[i]);
  }
}

}  // namespace ehrelay::kernels
