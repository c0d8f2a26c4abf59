#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace rwcert {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int pieces = 0;
};

// Globally adaptive 7/15 Gauss-Kronrod: bisect the piece with the largest error
// estimate until the summed estimate meets max(abs_tol, rel_tol * |I|) or the
// piece budget is spent. Boost's recursive driver halves its absolute target at
// every level, so once local estimates reach roundoff it recurses to full depth
// on every branch; a global budget does not.
template <class F>
QuadResult adaptive_gk(F&& f, double a, double b, double abs_tol, double rel_tol, int max_pieces = 200) {
  QuadResult r;
  if (!(b > a)) return r;
  struct Piece {
    double a, b, v, e;
    bool operator<(const Piece& o) const { return e < o.e; }
  };
  auto eval = [&](double l, double h) {
    double e = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, l, h, 0, 0.0, &e);
    return Piece{l, h, v, e};
  };
  std::priority_queue<Piece> heap;
  const Piece first = eval(a, b);
  double total = first.v, err = first.e;
  heap.push(first);
  int n = 1;
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) && n < max_pieces) {
    const Piece w = heap.top();
    const double mid = 0.5 * (w.a + w.b);
    if (!(mid > w.a && mid < w.b)) break;
    heap.pop();
    const Piece l = eval(w.a, mid), h = eval(mid, w.b);
    total += l.v + h.v - w.v;
    err += l.e + h.e - w.e;
    heap.push(l);
    heap.push(h);
    ++n;
  }
  // Resum to shed the cancellation accumulated by the running updates.
  for (; !heap.empty(); heap.pop()) {
    r.value += heap.top().v;
    r.error += heap.top().e;
  }
  r.pieces = n;
  return r;
}

}  // namespace rwcert
