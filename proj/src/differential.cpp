#include "nlsaddle/differential.hpp"

#include <array>

namespace nlsaddle {

namespace {

struct Axis
{
  std::size_t stride;
  int extent;
};

Axis axis_of(Grid const &g, int a)
{
  switch (a) {
  case 0: return {1, g.nx};
  case 1: return {std::size_t(g.nx), g.ny};
  default: return {std::size_t(g.nx) * g.ny, g.nz};
  }
}

int coordinate(Grid const &, int a, int i, int j, int k) { return a == 0 ? i : (a == 1 ? j : k); }

// dst[., dc] (+)= scale · D⁺_a src[., sc], Neumann boundary.
void forward_diff(Field const &src, int sc, Field &dst, int dc, int a, double scale, bool accumulate)
{
  Grid const &g = src.grid();
  Axis const ax = axis_of(g, a);
  int const ms = src.comps();
  int const md = dst.comps();
  auto s = src.data();
  auto d = dst.data();
  double const f = scale / g.h;
  for (int k = 0; k < g.nz; ++k) {
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        std::size_t const p = g.index(i, j, k);
        int const q = coordinate(g, a, i, j, k);
        double const v = q + 1 < ax.extent ? f * (s[(p + ax.stride) * ms + sc] - s[p * ms + sc]) : 0.0;
        double &out = d[p * md + dc];
        out = accumulate ? out + v : v;
      }
    }
  }
}

// dst[., dc] (+)= scale · D⁻_a src[., sc] with D⁻ = −(D⁺)*.
void backward_diff(Field const &src, int sc, Field &dst, int dc, int a, double scale, bool accumulate)
{
  Grid const &g = src.grid();
  Axis const ax = axis_of(g, a);
  int const ms = src.comps();
  int const md = dst.comps();
  auto s = src.data();
  auto d = dst.data();
  double const f = scale / g.h;
  for (int k = 0; k < g.nz; ++k) {
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        std::size_t const p = g.index(i, j, k);
        int const q = coordinate(g, a, i, j, k);
        double v = 0.0;
        if (ax.extent > 1) {
          if (q + 1 < ax.extent) { v += s[p * ms + sc]; }
          if (q > 0) { v -= s[(p - ax.stride) * ms + sc]; }
        }
        double &out = d[p * md + dc];
        out = accumulate ? out + f * v : f * v;
      }
    }
  }
}

void require(bool ok, char const *msg)
{
  if (!ok) { throw ShapeError(msg); }
}

// Index pairs of the symmetric tensor storage: diagonals first, then upper off-diagonals.
std::vector<std::array<int, 2>> sym_entries(int d)
{
  std::vector<std::array<int, 2>> e;
  for (int a = 0; a < d; ++a) { e.push_back({a, a}); }
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) { e.push_back({a, b}); }
  }
  return e;
}

} // namespace

Field gradient_field(Field const &u)
{
  int const d = u.grid().dims();
  std::vector<double> w;
  for (int c = 0; c < u.comps(); ++c) {
    for (int a = 0; a < d; ++a) { w.push_back(u.weights()[c]); }
  }
  return Field::vector_weighted(u.grid(), std::move(w));
}

Field symgrad_field(Field const &wf, int channels)
{
  int const d = wf.grid().dims();
  require(channels >= 1 && wf.comps() == channels * d, "symgrad_field: component count must be channels × dims");
  auto const tw = sym_tensor_weights(d);
  std::vector<double> w;
  for (int c = 0; c < channels; ++c) {
    for (double t : tw) { w.push_back(wf.weights()[c * d] * t); }
  }
  int const m = int(w.size());
  if (channels == 1) { return Field(FieldKind::SymTensor, wf.grid(), m, std::move(w)); }
  return Field::vector_weighted(wf.grid(), std::move(w));
}

void forward_gradient(Field const &u, Field &out)
{
  int const d = u.grid().dims();
  require(out.grid() == u.grid() && out.comps() == u.comps() * d, "forward_gradient: output layout");
  for (int c = 0; c < u.comps(); ++c) {
    for (int a = 0; a < d; ++a) { forward_diff(u, c, out, c * d + a, a, 1.0, false); }
  }
}

void forward_gradient_adjoint(Field const &g, Field &out)
{
  int const d = out.grid().dims();
  require(g.grid() == out.grid() && g.comps() == out.comps() * d, "forward_gradient_adjoint: output layout");
  for (int c = 0; c < out.comps(); ++c) {
    for (int a = 0; a < d; ++a) { backward_diff(g, c * d + a, out, c, a, -1.0, a > 0); }
  }
}

void symmetrised_gradient(Field const &w, int channels, Field &out)
{
  int const d = w.grid().dims();
  auto const entries = sym_entries(d);
  int const s = int(entries.size());
  require(w.comps() == channels * d && out.comps() == channels * s && out.grid() == w.grid(),
          "symmetrised_gradient: layout");
  for (int c = 0; c < channels; ++c) {
    for (int e = 0; e < s; ++e) {
      auto const [a, b] = entries[e];
      int const dc = c * s + e;
      if (a == b) {
        backward_diff(w, c * d + a, out, dc, a, 1.0, false);
      } else {
        backward_diff(w, c * d + a, out, dc, b, 0.5, false);
        backward_diff(w, c * d + b, out, dc, a, 0.5, true);
      }
    }
  }
}

void symmetrised_gradient_adjoint(Field const &e, int channels, Field &out)
{
  int const d = out.grid().dims();
  auto const entries = sym_entries(d);
  int const s = int(entries.size());
  require(out.comps() == channels * d && e.comps() == channels * s && out.grid() == e.grid(),
          "symmetrised_gradient_adjoint: layout");
  out.set_zero();
  // out_a = −D⁺_a e_aa − Σ_{b≠a} D⁺_b e_ab
  for (int c = 0; c < channels; ++c) {
    for (int k = 0; k < s; ++k) {
      auto const [a, b] = entries[k];
      int const sc = c * s + k;
      if (a == b) {
        forward_diff(e, sc, out, c * d + a, a, -1.0, true);
      } else {
        forward_diff(e, sc, out, c * d + a, b, -1.0, true);
        forward_diff(e, sc, out, c * d + b, a, -1.0, true);
      }
    }
  }
}

GradientOp::GradientOp(Field const &layout)
  : LinearOp(single_block("u", layout), single_block("grad", gradient_field(layout)))
{
}

void GradientOp::apply_to(StackedVector const &x, StackedVector &out) const { forward_gradient(x[0], out[0]); }
void GradientOp::adjoint_to(StackedVector const &y, StackedVector &out) const { forward_gradient_adjoint(y[0], out[0]); }

SymGradientOp::SymGradientOp(Field const &layout, int channels)
  : LinearOp(single_block("w", layout), single_block("sym", symgrad_field(layout, channels)))
  , channels_(channels)
{
}

void SymGradientOp::apply_to(StackedVector const &x, StackedVector &out) const
{
  symmetrised_gradient(x[0], channels_, out[0]);
}

void SymGradientOp::adjoint_to(StackedVector const &y, StackedVector &out) const
{
  symmetrised_gradient_adjoint(y[0], channels_, out[0]);
}

} // namespace nlsaddle
