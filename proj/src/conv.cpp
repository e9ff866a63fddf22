#include "lagdyn/conv.hpp"

#include <algorithm>
#include <cstddef>

namespace lagdyn::conv {

int conv_out_size(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

int convt_out_size(int in, int k, int stride, int pad) {
    return (in - 1) * stride - 2 * pad + k;
}

namespace {

// Valid output range [lo, hi) for one kernel offset: 0 <= o*stride + k - pad < limit.
inline void out_range(int k, int pad, int stride, int limit, int out_limit, int& lo, int& hi) {
    int shift = k - pad; // input index = o*stride + shift
    lo = 0;
    if (shift < 0) lo = (-shift + stride - 1) / stride;
    hi = out_limit;
    int max_o = (limit - 1 - shift) / stride; // largest o with in-index <= limit-1
    if (shift > limit - 1)
        hi = 0;
    else
        hi = std::min(hi, max_o + 1);
    if (hi < lo) hi = lo;
}

inline size_t idx4(int a, int b, int c, int d, int db, int dc, int dd) {
    return ((static_cast<size_t>(a) * db + b) * dc + c) * dd + d;
}

} // namespace

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const Conv2dDims& d) {
    for (int n = 0; n < d.n; ++n) {
        for (int o = 0; o < d.cout; ++o) {
            double* yo = y + idx4(n, o, 0, 0, d.cout, d.ho, d.wo);
            const double bo = b ? b[o] : 0.0;
            for (int i = 0; i < d.ho * d.wo; ++i) yo[i] = bo;
            for (int c = 0; c < d.cin; ++c) {
                const double* xc = x + idx4(n, c, 0, 0, d.cin, d.h, d.w);
                for (int ky = 0; ky < d.kh; ++ky) {
                    int oy_lo, oy_hi;
                    out_range(ky, d.pad, d.stride, d.h, d.ho, oy_lo, oy_hi);
                    for (int kx = 0; kx < d.kw; ++kx) {
                        int ox_lo, ox_hi;
                        out_range(kx, d.pad, d.stride, d.w, d.wo, ox_lo, ox_hi);
                        const double wv = w[idx4(o, c, ky, kx, d.cin, d.kh, d.kw)];
                        for (int oy = oy_lo; oy < oy_hi; ++oy) {
                            const int iy = oy * d.stride + ky - d.pad;
                            const double* xr = xc + static_cast<size_t>(iy) * d.w;
                            double* yr = yo + static_cast<size_t>(oy) * d.wo;
                            for (int ox = ox_lo; ox < ox_hi; ++ox)
                                yr[ox] += wv * xr[ox * d.stride + kx - d.pad];
                        }
                    }
                }
            }
        }
    }
}

void conv2d_backward(const double* x, const double* w, const double* gy, double* gx,
                     double* gw, double* gb, const Conv2dDims& d) {
    for (int n = 0; n < d.n; ++n) {
        for (int o = 0; o < d.cout; ++o) {
            const double* go = gy + idx4(n, o, 0, 0, d.cout, d.ho, d.wo);
            if (gb) {
                double acc = 0.0;
                for (int i = 0; i < d.ho * d.wo; ++i) acc += go[i];
                gb[o] += acc;
            }
            for (int c = 0; c < d.cin; ++c) {
                const double* xc = x + idx4(n, c, 0, 0, d.cin, d.h, d.w);
                double* gxc = gx ? gx + idx4(n, c, 0, 0, d.cin, d.h, d.w) : nullptr;
                for (int ky = 0; ky < d.kh; ++ky) {
                    int oy_lo, oy_hi;
                    out_range(ky, d.pad, d.stride, d.h, d.ho, oy_lo, oy_hi);
                    for (int kx = 0; kx < d.kw; ++kx) {
                        int ox_lo, ox_hi;
                        out_range(kx, d.pad, d.stride, d.w, d.wo, ox_lo, ox_hi);
                        const size_t wi = idx4(o, c, ky, kx, d.cin, d.kh, d.kw);
                        const double wv = w[wi];
                        double wacc = 0.0;
                        for (int oy = oy_lo; oy < oy_hi; ++oy) {
                            const int iy = oy * d.stride + ky - d.pad;
                            const double* gr = go + static_cast<size_t>(oy) * d.wo;
                            const double* xr = xc + static_cast<size_t>(iy) * d.w;
                            double* gxr = gxc ? gxc + static_cast<size_t>(iy) * d.w : nullptr;
                            for (int ox = ox_lo; ox < ox_hi; ++ox) {
                                const int ix = ox * d.stride + kx - d.pad;
                                const double g = gr[ox];
                                if (gxr) gxr[ix] += g * wv;
                                wacc += g * xr[ix];
                            }
                        }
                        if (gw) gw[wi] += wacc;
                    }
                }
            }
        }
    }
}

void convt2d_forward(const double* x, const double* w, const double* b, double* y,
                     const Conv2dDims& d) {
    // x (N,Cin,H,W) scatter-adds w patches into y (N,Cout,ho,wo)
    for (int n = 0; n < d.n; ++n) {
        for (int o = 0; o < d.cout; ++o) {
            double* yo = y + idx4(n, o, 0, 0, d.cout, d.ho, d.wo);
            const double bo = b ? b[o] : 0.0;
            for (int i = 0; i < d.ho * d.wo; ++i) yo[i] = bo;
            for (int c = 0; c < d.cin; ++c) {
                const double* xc = x + idx4(n, c, 0, 0, d.cin, d.h, d.w);
                for (int ky = 0; ky < d.kh; ++ky) {
                    int iy_lo, iy_hi;
                    out_range(ky, d.pad, d.stride, d.ho, d.h, iy_lo, iy_hi);
                    for (int kx = 0; kx < d.kw; ++kx) {
                        int ix_lo, ix_hi;
                        out_range(kx, d.pad, d.stride, d.wo, d.w, ix_lo, ix_hi);
                        const double wv = w[idx4(c, o, ky, kx, d.cout, d.kh, d.kw)];
                        for (int iy = iy_lo; iy < iy_hi; ++iy) {
                            const int oy = iy * d.stride + ky - d.pad;
                            const double* xr = xc + static_cast<size_t>(iy) * d.w;
                            double* yr = yo + static_cast<size_t>(oy) * d.wo;
                            for (int ix = ix_lo; ix < ix_hi; ++ix)
                                yr[ix * d.stride + kx - d.pad] += wv * xr[ix];
                        }
                    }
                }
            }
        }
    }
}

void convt2d_backward(const double* x, const double* w, const double* gy, double* gx,
                      double* gw, double* gb, const Conv2dDims& d) {
    for (int n = 0; n < d.n; ++n) {
        for (int o = 0; o < d.cout; ++o) {
            const double* go = gy + idx4(n, o, 0, 0, d.cout, d.ho, d.wo);
            if (gb) {
                double acc = 0.0;
                for (int i = 0; i < d.ho * d.wo; ++i) acc += go[i];
                gb[o] += acc;
            }
            for (int c = 0; c < d.cin; ++c) {
                const double* xc = x + idx4(n, c, 0, 0, d.cin, d.h, d.w);
                double* gxc = gx ? gx + idx4(n, c, 0, 0, d.cin, d.h, d.w) : nullptr;
                for (int ky = 0; ky < d.kh; ++ky) {
                    int iy_lo, iy_hi;
                    out_range(ky, d.pad, d.stride, d.ho, d.h, iy_lo, iy_hi);
                    for (int kx = 0; kx < d.kw; ++kx) {
                        int ix_lo, ix_hi;
                        out_range(kx, d.pad, d.stride, d.wo, d.w, ix_lo, ix_hi);
                        const size_t wi = idx4(c, o, ky, kx, d.cout, d.kh, d.kw);
                        const double wv = w[wi];
                        double wacc = 0.0;
                        for (int iy = iy_lo; iy < iy_hi; ++iy) {
                            const int oy = iy * d.stride + ky - d.pad;
                            const double* gr = go + static_cast<size_t>(oy) * d.wo;
                            const double* xr = xc + static_cast<size_t>(iy) * d.w;
                            double* gxr = gxc ? gxc + static_cast<size_t>(iy) * d.w : nullptr;
                            for (int ix = ix_lo; ix < ix_hi; ++ix) {
                                const double g = gr[ix * d.stride + kx - d.pad];
                                if (gxr) gxr[ix] += g * wv;
                                wacc += g * xr[ix];
                            }
                        }
                        if (gw) gw[wi] += wacc;
                    }
                }
            }
        }
    }
}

} // namespace lagdyn::conv
