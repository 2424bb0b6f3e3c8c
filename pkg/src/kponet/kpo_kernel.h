#ifndef KPO_KERNEL_H
#define KPO_KERNEL_H
#include <stdint.h>

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
    int64_t dim, int B, int N, int L);

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
    int64_t dim, int B, int N, int L);

void kpo_mode_stats_float(const float *xre, const float *xim,
                          const uint8_t *digits, double *occ, double *top,
                          int64_t dim, int B, int N, int L);

void kpo_mode_stats_double(const double *xre, const double *xim,
                           const uint8_t *digits, double *occ, double *top,
                           int64_t dim, int B, int N, int L);

double kpo_annihilate_col_float(const float *xre, const float *xim,
                                float *sre, float *sim,
                                const uint8_t *digits, const int64_t *gmap,
                                const float *sq, int mode, int col_b,
                                int64_t dim, int B, int N, int L);

double kpo_annihilate_col_double(const double *xre, const double *xim,
                                 double *sre, double *sim,
                                 const uint8_t *digits, const int64_t *gmap,
                                 const double *sq, int mode, int col_b,
                                 int64_t dim, int B, int N, int L);

#endif
