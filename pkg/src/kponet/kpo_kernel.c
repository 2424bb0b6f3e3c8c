/* Compiled core for batched state evolution: float and double variants of
 * the stage kernel and the small per-column helpers. */
#include <stdint.h>
#if defined(__SSE__) || defined(__x86_64__)
#include <xmmintrin.h>
#include <pmmintrin.h>
/* Amplitudes decay toward zero across the lattice; without flush-to-zero
 * the resulting subnormals stall the pipeline by orders of magnitude. */
#define KPO_FLUSH_SUBNORMALS() do { \
    _MM_SET_FLUSH_ZERO_MODE(_MM_FLUSH_ZERO_ON); \
    _MM_SET_DENORMALS_ZERO_MODE(_MM_DENORMALS_ZERO_ON); \
} while (0)
#else
#define KPO_FLUSH_SUBNORMALS() do {} while (0)
#endif

#define CHUNK 16
#define REAL float
#define FN(name) kpo_##name##_f32c16
#include "kpo_kernel_impl.h"
#undef REAL
#undef FN
#undef CHUNK

#define CHUNK 16
#define REAL double
#define FN(name) kpo_##name##_f64c16
#include "kpo_kernel_impl.h"
#undef REAL
#undef FN
#undef CHUNK

#define CHUNK 1
#define REAL float
#define FN(name) kpo_##name##_f32c1
#include "kpo_kernel_impl.h"
#undef REAL
#undef FN
#undef CHUNK

#define CHUNK 1
#define REAL double
#define FN(name) kpo_##name##_f64c1
#include "kpo_kernel_impl.h"
#undef REAL
#undef FN
#undef CHUNK

/* non-static entry points for the Cython wrapper */

void kpo_stage_float(
    const float *xre, const float *xim, float *o1re, float *o1im,
    const float *rAre, const float *rAim, float *o2re, float *o2im,
    const float *rBre, const float *rBim,
    const uint8_t *digits, const int64_t *gmap,
    const float *kerr, const float *d0s, const float *sq, const float *sq2,
    const float *cJ, const int32_t *pairs, int npair, const float *cH,
    const float *kap, float cp,
    const float *a1, const float *b1, const float *a2, const float *b2,
    float *norm_out, int do_norm, int do_out2,
    int64_t dim, int B, int N, int L)
{
    KPO_FLUSH_SUBNORMALS();
    if (B % 16 == 0)
        kpo_stage_f32c16(xre, xim, o1re, o1im, rAre, rAim, o2re, o2im, rBre, rBim,
                         digits, gmap, kerr, d0s, sq, sq2, cJ, pairs, npair, cH,
                         kap, cp, a1, b1, a2, b2, norm_out, do_norm, do_out2,
                         dim, B, N, L);
    else
        kpo_stage_f32c1(xre, xim, o1re, o1im, rAre, rAim, o2re, o2im, rBre, rBim,
                        digits, gmap, kerr, d0s, sq, sq2, cJ, pairs, npair, cH,
                        kap, cp, a1, b1, a2, b2, norm_out, do_norm, do_out2,
                        dim, B, N, L);
}

void kpo_stage_double(
    const double *xre, const double *xim, double *o1re, double *o1im,
    const double *rAre, const double *rAim, double *o2re, double *o2im,
    const double *rBre, const double *rBim,
    const uint8_t *digits, const int64_t *gmap,
    const double *kerr, const double *d0s, const double *sq, const double *sq2,
    const double *cJ, const int32_t *pairs, int npair, const double *cH,
    const double *kap, double cp,
    const double *a1, const double *b1, const double *a2, const double *b2,
    double *norm_out, int do_norm, int do_out2,
    int64_t dim, int B, int N, int L)
{
    KPO_FLUSH_SUBNORMALS();
    if (B % 16 == 0)
        kpo_stage_f64c16(xre, xim, o1re, o1im, rAre, rAim, o2re, o2im, rBre, rBim,
                         digits, gmap, kerr, d0s, sq, sq2, cJ, pairs, npair, cH,
                         kap, cp, a1, b1, a2, b2, norm_out, do_norm, do_out2,
                         dim, B, N, L);
    else
        kpo_stage_f64c1(xre, xim, o1re, o1im, rAre, rAim, o2re, o2im, rBre, rBim,
                        digits, gmap, kerr, d0s, sq, sq2, cJ, pairs, npair, cH,
                        kap, cp, a1, b1, a2, b2, norm_out, do_norm, do_out2,
                        dim, B, N, L);
}

void kpo_mode_stats_float(const float *xre, const float *xim,
                          const uint8_t *digits, double *occ, double *top,
                          int64_t dim, int B, int N, int L)
{
    KPO_FLUSH_SUBNORMALS();
    kpo_mode_stats_f32c16(xre, xim, digits, occ, top, dim, B, N, L);
}

void kpo_mode_stats_double(const double *xre, const double *xim,
                           const uint8_t *digits, double *occ, double *top,
                           int64_t dim, int B, int N, int L)
{
    KPO_FLUSH_SUBNORMALS();
    kpo_mode_stats_f64c16(xre, xim, digits, occ, top, dim, B, N, L);
}

double kpo_annihilate_col_float(const float *xre, const float *xim,
                                float *sre, float *sim,
                                const uint8_t *digits, const int64_t *gmap,
                                const float *sq, int mode, int col_b,
                                int64_t dim, int B, int N, int L)
{
    KPO_FLUSH_SUBNORMALS();
    return kpo_annihilate_col_f32c16(xre, xim, sre, sim, digits, gmap, sq,
                                     mode, col_b, dim, B, N, L);
}

double kpo_annihilate_col_double(const double *xre, const double *xim,
                                 double *sre, double *sim,
                                 const uint8_t *digits, const int64_t *gmap,
                                 const double *sq, int mode, int col_b,
                                 int64_t dim, int B, int N, int L)
{
    KPO_FLUSH_SUBNORMALS();
    return kpo_annihilate_col_f64c16(xre, xim, sre, sim, digits, gmap, sq,
                                     mode, col_b, dim, B, N, L);
}
