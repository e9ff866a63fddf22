#pragma once

namespace lagdyn::conv {

// Raw NCHW convolution kernels shared by the plain evaluation path and the
// autodiff ops. Gradient buffers may be null to skip that input.

struct Conv2dDims {
    int n, cin, h, w;
    int cout, kh, kw;
    int stride, pad;
    int ho, wo;
};

/// Output spatial size of a strided convolution.
int conv_out_size(int in, int k, int stride, int pad);
/// Output spatial size of a transposed convolution.
int convt_out_size(int in, int k, int stride, int pad);

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const Conv2dDims& d);
void conv2d_backward(const double* x, const double* w, const double* gy, double* gx,
                     double* gw, double* gb, const Conv2dDims& d);

/// Transposed conv: x (N,Cin,H,W), w (Cin,Cout,kh,kw), y (N,Cout,ho,wo).
void convt2d_forward(const double* x, const double* w, const double* b, double* y,
                     const Conv2dDims& d);
void convt2d_backward(const double* x, const double* w, const double* gy, double* gx,
                      double* gw, double* gb, const Conv2dDims& d);

} // namespace lagdyn::conv
