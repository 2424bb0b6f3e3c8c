# cython: boundscheck=False, wraparound=False, language_level=3
"""Thin wrapper over the C stage kernel; see kpo_kernel_impl.h for the math."""

from libc.stdint cimport uint8_t, int32_t, int64_t

CHUNK = 16

cdef extern from "kpo_kernel.h":
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
        int64_t dim, int B, int N, int L) nogil
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
        int64_t dim, int B, int N, int L) nogil
    void kpo_mode_stats_float(const float *xre, const float *xim,
                              const uint8_t *digits, double *occ, double *top,
                              int64_t dim, int B, int N, int L) nogil
    void kpo_mode_stats_double(const double *xre, const double *xim,
                               const uint8_t *digits, double *occ, double *top,
                               int64_t dim, int B, int N, int L) nogil
    double kpo_annihilate_col_float(const float *xre, const float *xim,
                                    float *sre, float *sim,
                                    const uint8_t *digits, const int64_t *gmap,
                                    const float *sq, int mode, int col_b,
                                    int64_t dim, int B, int N, int L) nogil
    double kpo_annihilate_col_double(const double *xre, const double *xim,
                                     double *sre, double *sim,
                                     const uint8_t *digits, const int64_t *gmap,
                                     const double *sq, int mode, int col_b,
                                     int64_t dim, int B, int N, int L) nogil


def stage_f32(float[:, ::1] xre, float[:, ::1] xim,
              float[:, ::1] o1re, float[:, ::1] o1im,
              float[:, ::1] rAre, float[:, ::1] rAim,
              o2re, o2im, rBre, rBim,
              uint8_t[:, ::1] digits, int64_t[:, ::1] gmap,
              float[::1] kerr, float[:, ::1] d0s,
              float[::1] sq, float[::1] sq2,
              float[:, ::1] cJ, int32_t[:, ::1] pairs,
              float[:, ::1] cH, float[::1] kap, float cp,
              float[::1] a1, float[::1] b1, float[::1] a2, float[::1] b2,
              norm_out):
    cdef int64_t dim = xre.shape[0]
    cdef int B = xre.shape[1]
    cdef int N = digits.shape[1]
    cdef int L = gmap.shape[1]
    cdef int npair = pairs.shape[0]
    cdef float[:, ::1] _o2re, _o2im, _rBre, _rBim
    cdef float[::1] _nrm
    cdef float *o2re_p = NULL
    cdef float *o2im_p = NULL
    cdef const float *rBre_p = NULL
    cdef const float *rBim_p = NULL
    cdef float *nrm_p = NULL
    cdef int do_out2 = 0, do_norm = 0
    if o2re is not None:
        _o2re = o2re; _o2im = o2im; _rBre = rBre; _rBim = rBim
        o2re_p = &_o2re[0, 0]; o2im_p = &_o2im[0, 0]
        rBre_p = &_rBre[0, 0]; rBim_p = &_rBim[0, 0]
        do_out2 = 1
    if norm_out is not None:
        _nrm = norm_out
        nrm_p = &_nrm[0]
        do_norm = 1
    cdef const int32_t *pairs_p = NULL
    cdef const float *cJ_p = NULL
    if npair > 0:
        pairs_p = &pairs[0, 0]
        cJ_p = &cJ[0, 0]
    with nogil:
        kpo_stage_float(&xre[0, 0], &xim[0, 0], &o1re[0, 0], &o1im[0, 0],
                        &rAre[0, 0], &rAim[0, 0], o2re_p, o2im_p, rBre_p, rBim_p,
                        &digits[0, 0], &gmap[0, 0], &kerr[0], &d0s[0, 0],
                        &sq[0], &sq2[0], cJ_p, pairs_p, npair, &cH[0, 0],
                        &kap[0], cp, &a1[0], &b1[0], &a2[0], &b2[0],
                        nrm_p, do_norm, do_out2, dim, B, N, L)


def stage_f64(double[:, ::1] xre, double[:, ::1] xim,
              double[:, ::1] o1re, double[:, ::1] o1im,
              double[:, ::1] rAre, double[:, ::1] rAim,
              o2re, o2im, rBre, rBim,
              uint8_t[:, ::1] digits, int64_t[:, ::1] gmap,
              double[::1] kerr, double[:, ::1] d0s,
              double[::1] sq, double[::1] sq2,
              double[:, ::1] cJ, int32_t[:, ::1] pairs,
              double[:, ::1] cH, double[::1] kap, double cp,
              double[::1] a1, double[::1] b1, double[::1] a2, double[::1] b2,
              norm_out):
    cdef int64_t dim = xre.shape[0]
    cdef int B = xre.shape[1]
    cdef int N = digits.shape[1]
    cdef int L = gmap.shape[1]
    cdef int npair = pairs.shape[0]
    cdef double[:, ::1] _o2re, _o2im, _rBre, _rBim
    cdef double[::1] _nrm
    cdef double *o2re_p = NULL
    cdef double *o2im_p = NULL
    cdef const double *rBre_p = NULL
    cdef const double *rBim_p = NULL
    cdef double *nrm_p = NULL
    cdef int do_out2 = 0, do_norm = 0
    if o2re is not None:
        _o2re = o2re; _o2im = o2im; _rBre = rBre; _rBim = rBim
        o2re_p = &_o2re[0, 0]; o2im_p = &_o2im[0, 0]
        rBre_p = &_rBre[0, 0]; rBim_p = &_rBim[0, 0]
        do_out2 = 1
    if norm_out is not None:
        _nrm = norm_out
        nrm_p = &_nrm[0]
        do_norm = 1
    cdef const int32_t *pairs_p = NULL
    cdef const double *cJ_p = NULL
    if npair > 0:
        pairs_p = &pairs[0, 0]
        cJ_p = &cJ[0, 0]
    with nogil:
        kpo_stage_double(&xre[0, 0], &xim[0, 0], &o1re[0, 0], &o1im[0, 0],
                         &rAre[0, 0], &rAim[0, 0], o2re_p, o2im_p, rBre_p, rBim_p,
                         &digits[0, 0], &gmap[0, 0], &kerr[0], &d0s[0, 0],
                         &sq[0], &sq2[0], cJ_p, pairs_p, npair, &cH[0, 0],
                         &kap[0], cp, &a1[0], &b1[0], &a2[0], &b2[0],
                         nrm_p, do_norm, do_out2, dim, B, N, L)


def mode_stats_f32(float[:, ::1] xre, float[:, ::1] xim,
                   uint8_t[:, ::1] digits, double[:, ::1] occ,
                   double[:, ::1] top, int L):
    cdef int64_t dim = xre.shape[0]
    cdef int B = xre.shape[1]
    cdef int N = digits.shape[1]
    with nogil:
        kpo_mode_stats_float(&xre[0, 0], &xim[0, 0], &digits[0, 0],
                             &occ[0, 0], &top[0, 0], dim, B, N, L)


def mode_stats_f64(double[:, ::1] xre, double[:, ::1] xim,
                   uint8_t[:, ::1] digits, double[:, ::1] occ,
                   double[:, ::1] top, int L):
    cdef int64_t dim = xre.shape[0]
    cdef int B = xre.shape[1]
    cdef int N = digits.shape[1]
    with nogil:
        kpo_mode_stats_double(&xre[0, 0], &xim[0, 0], &digits[0, 0],
                              &occ[0, 0], &top[0, 0], dim, B, N, L)


def annihilate_col_f32(float[:, ::1] xre, float[:, ::1] xim,
                       float[::1] sre, float[::1] sim,
                       uint8_t[:, ::1] digits, int64_t[:, ::1] gmap,
                       float[::1] sq, int mode, int col_b):
    cdef int64_t dim = xre.shape[0]
    cdef int B = xre.shape[1]
    cdef int N = digits.shape[1]
    cdef int L = gmap.shape[1]
    cdef double nrm
    with nogil:
        nrm = kpo_annihilate_col_float(&xre[0, 0], &xim[0, 0], &sre[0], &sim[0],
                                       &digits[0, 0], &gmap[0, 0], &sq[0],
                                       mode, col_b, dim, B, N, L)
    return nrm


def annihilate_col_f64(double[:, ::1] xre, double[:, ::1] xim,
                       double[::1] sre, double[::1] sim,
                       uint8_t[:, ::1] digits, int64_t[:, ::1] gmap,
                       double[::1] sq, int mode, int col_b):
    cdef int64_t dim = xre.shape[0]
    cdef int B = xre.shape[1]
    cdef int N = digits.shape[1]
    cdef int L = gmap.shape[1]
    cdef double nrm
    with nogil:
        nrm = kpo_annihilate_col_double(&xre[0, 0], &xim[0, 0], &sre[0], &sim[0],
                                        &digits[0, 0], &gmap[0, 0], &sq[0],
                                        mode, col_b, dim, B, N, L)
    return nrm
