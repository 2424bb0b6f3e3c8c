/* Batched stage kernel for the oscillator-network right-hand side.
 *
 * Included twice from kpo_kernel.c with REAL/FN defined for float and
 * double.  States are stored as separate re/im planes of shape (dim, B),
 * B a multiple of CHUNK.  One call evaluates, for every basis row r and
 * column b,
 *
 *     k = -i H x - kappa * ntot * x          (H real in the Fock basis)
 *     out1 = a1 * rowA + b1 * k
 *     out2 = a2 * rowB + b2 * k              (optional)
 *
 * with per-column blend coefficients, which covers all four RK4 stages
 * including per-column renormalization folded into a1/b1.  When do_norm is
 * set the squared norm of out1 accumulates into norm_out per column.
 *
 * Neighbor rows are addressed through per-mode offset tables gmap so a
 * cache-blocked basis ordering can be swapped in without touching the
 * kernel: digit n_m contributes gmap[m*L + n_m] to the flat index.
 */

static void FN(stage)(
    const REAL *restrict xre, const REAL *restrict xim,
    REAL *o1re, REAL *o1im,
    const REAL *rAre, const REAL *rAim,
    REAL *o2re, REAL *o2im,
    const REAL *rBre, const REAL *rBim,
    const uint8_t *restrict digits,
    const int64_t *restrict gmap,
    const REAL *restrict kerr,
    const REAL *restrict d0s,
    const REAL *restrict sq, const REAL *restrict sq2,
    const REAL *restrict cJ, const int32_t *restrict pairs, int npair,
    const REAL *restrict cH,
    const REAL *restrict kap,
    REAL cp,
    const REAL *restrict a1, const REAL *restrict b1,
    const REAL *restrict a2, const REAL *restrict b2,
    REAL *restrict norm_out, int do_norm, int do_out2,
    int64_t dim, int B, int N, int L)
{
    for (int64_t r = 0; r < dim; r++) {
        const uint8_t *dg = digits + r * N;
        int ntot = 0;
        for (int m = 0; m < N; m++) ntot += dg[m];
        const REAL ntot_r = (REAL)ntot;
        for (int c0 = 0; c0 < B; c0 += CHUNK) {
            REAL hr[CHUNK], hi[CHUNK];
            for (int b = 0; b < CHUNK; b++) { hr[b] = 0; hi[b] = 0; }
            for (int m = 0; m < N; m++) {
                const int n = dg[m];
                const int64_t *gm = gmap + (int64_t)m * L;
                const int64_t g0 = gm[n];
                if (n >= 2) {
                    const REAL v = cp * sq2[n];
                    const int64_t col = r + gm[n - 2] - g0;
                    const REAL *xr = xre + col * B + c0, *xi = xim + col * B + c0;
                    for (int b = 0; b < CHUNK; b++) { hr[b] += v * xr[b]; hi[b] += v * xi[b]; }
                }
                if (n <= L - 3) {
                    const REAL v = cp * sq2[n + 2];
                    const int64_t col = r + gm[n + 2] - g0;
                    const REAL *xr = xre + col * B + c0, *xi = xim + col * B + c0;
                    for (int b = 0; b < CHUNK; b++) { hr[b] += v * xr[b]; hi[b] += v * xi[b]; }
                }
                if (n >= 1) {
                    const REAL base = sq[n];
                    const int64_t col = r + gm[n - 1] - g0;
                    const REAL *xr = xre + col * B + c0, *xi = xim + col * B + c0;
                    const REAL *ch = cH + (int64_t)m * B + c0;
                    for (int b = 0; b < CHUNK; b++) {
                        const REAL vb = ch[b] * base;
                        hr[b] += vb * xr[b]; hi[b] += vb * xi[b];
                    }
                }
                if (n <= L - 2) {
                    const REAL base = sq[n + 1];
                    const int64_t col = r + gm[n + 1] - g0;
                    const REAL *xr = xre + col * B + c0, *xi = xim + col * B + c0;
                    const REAL *ch = cH + (int64_t)m * B + c0;
                    for (int b = 0; b < CHUNK; b++) {
                        const REAL vb = ch[b] * base;
                        hr[b] += vb * xr[b]; hi[b] += vb * xi[b];
                    }
                }
            }
            for (int q = 0; q < npair; q++) {
                const int i = pairs[2 * q], j = pairs[2 * q + 1];
                const int ni = dg[i], nj = dg[j];
                const int64_t *gi = gmap + (int64_t)i * L;
                const int64_t *gj = gmap + (int64_t)j * L;
                const REAL *cj = cJ + (int64_t)q * B + c0;
                if (ni >= 1 && nj <= L - 2) {
                    const REAL base = sq[ni] * sq[nj + 1];
                    const int64_t col = r + gi[ni - 1] - gi[ni] + gj[nj + 1] - gj[nj];
                    const REAL *xr = xre + col * B + c0, *xi = xim + col * B + c0;
                    for (int b = 0; b < CHUNK; b++) {
                        const REAL vb = cj[b] * base;
                        hr[b] += vb * xr[b]; hi[b] += vb * xi[b];
                    }
                }
                if (nj >= 1 && ni <= L - 2) {
                    const REAL base = sq[nj] * sq[ni + 1];
                    const int64_t col = r + gj[nj - 1] - gj[nj] + gi[ni + 1] - gi[ni];
                    const REAL *xr = xre + col * B + c0, *xi = xim + col * B + c0;
                    for (int b = 0; b < CHUNK; b++) {
                        const REAL vb = cj[b] * base;
                        hr[b] += vb * xr[b]; hi[b] += vb * xi[b];
                    }
                }
            }
            /* diagonal, -i rotation, decay, output blends */
            const REAL kerr_r = kerr[r];
            const REAL *xr = xre + r * B + c0, *xi = xim + r * B + c0;
            const REAL *rar = rAre + r * B + c0, *rai = rAim + r * B + c0;
            REAL *o1r = o1re + r * B + c0, *o1i = o1im + r * B + c0;
            for (int b = 0; b < CHUNK; b++) {
                REAL d = kerr_r;
                for (int m = 0; m < N; m++) d += d0s[m * B + c0 + b] * dg[m];
                const REAL hrr = hr[b] + d * xr[b];
                const REAL hii = hi[b] + d * xi[b];
                hr[b] = hii - kap[c0 + b] * ntot_r * xr[b];   /* k_re */
                hi[b] = -hrr - kap[c0 + b] * ntot_r * xi[b];  /* k_im */
            }
            if (do_out2) {
                const REAL *rbr = rBre + r * B + c0, *rbi = rBim + r * B + c0;
                REAL *o2r = o2re + r * B + c0, *o2i = o2im + r * B + c0;
                for (int b = 0; b < CHUNK; b++) {
                    o2r[b] = a2[c0 + b] * rbr[b] + b2[c0 + b] * hr[b];
                    o2i[b] = a2[c0 + b] * rbi[b] + b2[c0 + b] * hi[b];
                }
            }
            if (do_norm) {
                for (int b = 0; b < CHUNK; b++) {
                    const REAL u1r = a1[c0 + b] * rar[b] + b1[c0 + b] * hr[b];
                    const REAL u1i = a1[c0 + b] * rai[b] + b1[c0 + b] * hi[b];
                    o1r[b] = u1r;
                    o1i[b] = u1i;
                    norm_out[c0 + b] += u1r * u1r + u1i * u1i;
                }
            } else {
                for (int b = 0; b < CHUNK; b++) {
                    o1r[b] = a1[c0 + b] * rar[b] + b1[c0 + b] * hr[b];
                    o1i[b] = a1[c0 + b] * rai[b] + b1[c0 + b] * hi[b];
                }
            }
        }
    }
}

#if CHUNK != 1
/* Per-mode occupation sums and top-level (leakage) populations, all columns:
 * occ[m*B+b] = sum_r n_m(r) |x[r,b]|^2, top[m*B+b] over rows with n_m = L-1. */
static void FN(mode_stats)(
    const REAL *restrict xre, const REAL *restrict xim,
    const uint8_t *restrict digits,
    double *restrict occ, double *restrict top,
    int64_t dim, int B, int N, int L)
{
    for (int m = 0; m < N; m++)
        for (int b = 0; b < B; b++) { occ[m * B + b] = 0.0; top[m * B + b] = 0.0; }
    for (int64_t r = 0; r < dim; r++) {
        const uint8_t *dg = digits + r * N;
        const REAL *xr = xre + r * B, *xi = xim + r * B;
        for (int b = 0; b < B; b++) {
            const double p = (double)xr[b] * xr[b] + (double)xi[b] * xi[b];
            for (int m = 0; m < N; m++) {
                occ[m * B + b] += dg[m] * p;
                if (dg[m] == L - 1) top[m * B + b] += p;
            }
        }
    }
}

/* Apply the annihilation operator of one mode to a single column, writing
 * into scratch; returns the squared norm of the result. */
static double FN(annihilate_col)(
    const REAL *restrict xre, const REAL *restrict xim,
    REAL *restrict sre, REAL *restrict sim,
    const uint8_t *restrict digits, const int64_t *restrict gmap,
    const REAL *restrict sq,
    int mode, int col_b,
    int64_t dim, int B, int N, int L)
{
    const int64_t *gm = gmap + (int64_t)mode * L;
    double nrm = 0.0;
    for (int64_t r = 0; r < dim; r++) {
        const int n = digits[r * N + mode];
        REAL vr = 0, vi = 0;
        if (n <= L - 2) {
            const int64_t src = r + gm[n + 1] - gm[n];
            const REAL c = sq[n + 1];
            vr = c * xre[src * B + col_b];
            vi = c * xim[src * B + col_b];
        }
        sre[r] = vr;
        sim[r] = vi;
        nrm += (double)vr * vr + (double)vi * vi;
    }
    return nrm;
}

#endif /* CHUNK != 1 */
