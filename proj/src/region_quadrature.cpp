#include "tfem/region_quadrature.hpp"

#include "tfem/classify.hpp"
#include "tfem/errors.hpp"
#include "tfem/invert.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace tfem {

namespace {

// Candidate box with its image range and det J interval computed once.
// Every downstream filter reads these instead of re-deriving them.
struct CandBox {
  ParamBox box;
  ParamBox range;
  Interval dj;
};

struct Builder {
  const ElementGeom& g;
  int max_depth;
  std::vector<QuadPoint3> cell_rule;
  double tol;         // inversion acceptance tolerance
  double fold_margin; // safety margin on det J interval straddle tests
  double overlap_eps; // candidate-filter cushion
  double ambig_safe;  // det J above this is safely outside the fold band
  int nsub = 3;      // per-axis point grid in boundary cells
  int nsub_skin = 3; // same, for skin-only cells away from the rim
  int rim_extra = 4; // extra subdivision levels allowed at the rim
  double rim_band;   // det J lower bounds under this trigger rim descent
  std::vector<RQPoint> out;
  mutable long n_member = 0, n_polish = 0, n_fallback = 0, n_risky_cells = 0,
               n_uniform_cells = 0, n_fb_nullopt = 0, n_fb_band = 0,
               n_fb_mem = 0, n_fb_rootless = 0, n_rim_cells = 0;
  mutable double t_uniform = 0, t_skin = 0, t_fold = 0, t_flags = 0,
                 t_refine = 0, t_split = 0;
  mutable double m_bin = 0, m_frac = 0, m_adopt = 0, m_drop = 0, m_interior_cut = 0;
  mutable long n_interior_cut = 0;
  mutable std::vector<ParamBox> scratch;

  CandBox make_cand(const ParamBox& b) const {
    return {b, map_range(g, b), detj_interval(g, b)};
  }

  double target_side(int level) const {
    return std::max(2.0 * std::pow(0.5, level), 2.0 / 2048.0) * 1.0001;
  }

  const std::vector<ParamBox>& plain(const std::vector<CandBox>& cands) const {
    scratch.clear();
    for (const CandBox& c : cands) scratch.push_back(c.box);
    return scratch;
  }

  bool member(const Vec3& x, const std::vector<CandBox>& cands,
              Vec3* xi_plus) const {
    ++n_member;
    const RootSet rs = invert_trilinear_boxes(g, x, tol, plain(cands));
    if (rs.any_ambiguous() || rs.n_plus() != 1 || rs.n_minus() != 0)
      return false;
    for (const Root& r : rs.roots)
      if (r.sign > 0) *xi_plus = r.xi;
    return true;
  }

  // Membership already established for the whole cell; only the branch
  // root is needed.  Newton from a nearby seed finds it in a couple of
  // steps; anything questionable goes back through the full test.
  bool branch_root(const Vec3& x, const Vec3& seed,
                   const std::vector<CandBox>& cands, Vec3* xi_plus) const {
    ++n_polish;
    if (auto r = polish_root(g, x, seed, tol)) {
      if (jacobian(g, *r).detJ >= ambig_safe) {
        *xi_plus = *r;
        return true;
      }
    }
    ++n_fallback;
    return member(x, cands, xi_plus);
  }

  // Drop boxes whose image cannot reach the cell.  The range test is
  // exact for the multilinear map, so no box holding a preimage of any
  // cell point is ever dropped.
  std::vector<CandBox> filter_candidates(const std::vector<CandBox>& in,
                                         const Vec3& lo,
                                         const Vec3& hi) const {
    std::vector<CandBox> kept;
    kept.reserve(in.size());
    for (const CandBox& c : in) {
      bool overlap = true;
      for (int k = 0; k < 3; ++k)
        if (c.range.hi[k] < lo[k] - overlap_eps ||
            c.range.lo[k] > hi[k] + overlap_eps) {
          overlap = false;
          break;
        }
      if (overlap) kept.push_back(c);
    }
    return kept;
  }

  // Bisect every box down to the target side.  Shared by all eight
  // subcells of a cell, so the split (and the range and interval work
  // that goes with it) happens once per level instead of once per
  // child.
  std::vector<CandBox> split_candidates(const std::vector<CandBox>& in,
                                        double target) const {
    std::vector<CandBox> done;
    done.reserve(in.size() * 8);
    std::vector<ParamBox> work; // geometry only until the target size
    for (const CandBox& c : in) {
      const Vec3 side = c.box.hi - c.box.lo;
      if (side.maxCoeff() <= target) {
        done.push_back(c);
        continue;
      }
      work.push_back(c.box);
      while (!work.empty()) {
        ParamBox b = work.back();
        work.pop_back();
        const Vec3 s = b.hi - b.lo;
        int axis = 0;
        if (s[1] > s[axis]) axis = 1;
        if (s[2] > s[axis]) axis = 2;
        if (s[axis] <= target) {
          done.push_back(make_cand(b));
          continue;
        }
        const double mid = 0.5 * (b.lo[axis] + b.hi[axis]);
        ParamBox lo_half = b, hi_half = b;
        lo_half.hi[axis] = mid;
        hi_half.lo[axis] = mid;
        work.push_back(lo_half);
        work.push_back(hi_half);
      }
    }
    return done;
  }

  // True when the image of this boundary patch of the reference cube
  // can cross the open cell.  Bisecting a few times makes the bound
  // follow the surface instead of the box around it; a patch that only
  // touches the closed cell boundary does not count, which is what
  // keeps flat element faces lying on cell interfaces harmless.
  bool face_reaches(const ParamBox& face, const Vec3& lo, const Vec3& hi,
                    int budget) const {
    const ParamBox r = map_range(g, face);
    for (int k = 0; k < 3; ++k)
      if (r.hi[k] <= lo[k] || r.lo[k] >= hi[k]) return false;
    if (budget == 0) return true;
    int axis = 0;
    Vec3 side = face.hi - face.lo;
    if (side[1] > side[axis]) axis = 1;
    if (side[2] > side[axis]) axis = 2;
    if (side[axis] <= 0.0) return true; // degenerate patch, keep the flag
    const double mid = 0.5 * (face.lo[axis] + face.hi[axis]);
    ParamBox a = face, b = face;
    a.hi[axis] = mid;
    b.lo[axis] = mid;
    return face_reaches(a, lo, hi, budget - 1) ||
           face_reaches(b, lo, hi, budget - 1);
  }

  // Fold analog: true when the det J zero set inside the box can map
  // into the open cell.  Sub-boxes that stop straddling or whose image
  // misses the cell drop out, which strips the smear the interval
  // arithmetic puts around the true surface.
  bool fold_reaches(const ParamBox& box, const Vec3& lo, const Vec3& hi,
                    int budget) const {
    const Interval dj = detj_interval(g, box);
    if (!(dj.lo <= fold_margin && dj.hi >= -fold_margin)) return false;
    const ParamBox r = map_range(g, box);
    for (int k = 0; k < 3; ++k)
      if (r.hi[k] <= lo[k] || r.lo[k] >= hi[k]) return false;
    if (budget == 0) return true;
    int axis = 0;
    const Vec3 side = box.hi - box.lo;
    if (side[1] > side[axis]) axis = 1;
    if (side[2] > side[axis]) axis = 2;
    if (side[axis] <= 0.0) return true;
    const double mid = 0.5 * (box.lo[axis] + box.hi[axis]);
    ParamBox a = box, b = box;
    a.hi[axis] = mid;
    b.lo[axis] = mid;
    return fold_reaches(a, lo, hi, budget - 1) ||
           fold_reaches(b, lo, hi, budget - 1);
  }

  double now() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }

  void recurse(const Vec3& lo, const Vec3& hi, int level,
               const std::vector<CandBox>& cands_in) {
    double t0 = now();
    const std::vector<CandBox> cands = filter_candidates(cands_in, lo, hi);
    t_refine += now() - t0;
    if (cands.empty()) return; // no preimage: outside the element

    t0 = now();
    bool fold_risk = false, skin = false, all_positive = true;
    for (const CandBox& c : cands) {
      if (!fold_risk && c.dj.lo <= fold_margin && c.dj.hi >= -fold_margin)
        fold_risk = fold_reaches(c.box, lo, hi, 8);
      if (c.dj.lo <= fold_margin) all_positive = false;
      for (int k = 0; k < 3 && !skin; ++k) {
        if (c.box.lo[k] <= -1.0 + 1e-9) {
          ParamBox f = c.box;
          f.hi[k] = f.lo[k];
          skin = face_reaches(f, lo, hi, 6);
        }
        if (!skin && c.box.hi[k] >= 1.0 - 1e-9) {
          ParamBox f = c.box;
          f.lo[k] = f.hi[k];
          skin = face_reaches(f, lo, hi, 6);
        }
      }
    }
    t_flags += now() - t0;

    if (!fold_risk && !skin) {
      // Membership is uniform across the cell: roots can only appear or
      // vanish through the fold surface or the element skin, and both
      // are provably outside every candidate box.  One center test
      // settles the cell; descendants keep the certificate, so they are
      // enumerated directly and only their branch roots get computed.
      const Vec3 center = 0.5 * (lo + hi);
      Vec3 xi_plus;
      t0 = now();
      if (!member(center, cands, &xi_plus)) return; // fold or exterior
      ++n_uniform_cells;
      emit_uniform(lo, hi, level, xi_plus, cands);
      t_uniform += now() - t0;
      return;
    }

    if (level < max_depth) {
      subdivide(lo, hi, level, cands);
      return;
    }

    // Where the skin meets the fold rim the surviving branch's det J
    // collapses, the pushed-forward gradients steepen like an inverse
    // power of the distance to the rim curve, and no subcell grid at
    // nominal depth can track that.  Cells whose candidates show both
    // skin and vanishing det J subdivide a few extra levels, with the
    // det J band shrinking fourfold per level so the refined set stays
    // a tube around the rim instead of a slab around the fold.
    if (skin && level < max_depth + rim_extra) {
      double dj_min = std::numeric_limits<double>::infinity();
      for (const CandBox& c : cands) dj_min = std::min(dj_min, c.dj.lo);
      const double band =
          rim_band * std::pow(0.25, static_cast<double>(level - max_depth));
      if (dj_min < band) {
        ++n_rim_cells;
        subdivide(lo, hi, level, cands);
        return;
      }
    }

    ++n_risky_cells;
    // Risky cell at max depth: resolve the membership boundary by
    // testing 27 subcell centers individually.
    if (!fold_risk && all_positive) {
      const int ns = nsub_skin;
      const Vec3 h = (hi - lo) / static_cast<double>(ns);
      const double w = (hi - lo).prod() / static_cast<double>(ns * ns * ns);
      // Skin cut without a fold: one positive branch, so the extended
      // map decides each center by where its tracked root lands.  The
      // root must also account for every candidate whose image range
      // holds the point, otherwise the verdict goes back through the
      // full test.  Each subcell is then weighted by the fraction the
      // clip model says lies inside, and the slice a non-member subcell
      // still covers is handed to a member neighbour so the cell's
      // covered volume is conserved.
      t0 = now();
      Vec3 seed = 0.5 * (cands[0].box.lo + cands[0].box.hi);
      struct Sample {
        Vec3 x;
        SkinVerdict v;
        Clip c;
      };
      std::vector<Sample> smp(static_cast<std::size_t>(ns * ns * ns));
      for (int k = 0; k < ns; ++k)
        for (int j = 0; j < ns; ++j)
          for (int i = 0; i < ns; ++i) {
            Sample& s = smp[static_cast<std::size_t>((k * ns + j) * ns + i)];
            s.x = lo + h.cwiseProduct(Vec3(i + 0.5, j + 0.5, k + 0.5));
            s.v = skin_probe(s.x, cands, seed);
            s.c.f = s.v.mem ? 1.0 : 0.0; // ABLATION: binary verdicts
            if (s.v.mem) {
              m_bin += w;
              m_frac += w * s.c.f;
            }
          }
      // Each sample's slice of the region is emitted at the slice's own
      // centroid, re-polished so the stored preimage matches the shifted
      // point.  That works for non-member samples too: their slice sits
      // across the cut on the member side, so the shifted point is a
      // genuine member.  When the polish fails or lands in the fold
      // band, a member keeps its centre placement and a sliver falls
      // back to the root clamped into the cube, then to a neighbouring
      // member sample, and is dropped only with no member in the cell.
      for (int k = 0; k < ns; ++k)
        for (int j = 0; j < ns; ++j)
          for (int i = 0; i < ns; ++i) {
            Sample& s = smp[static_cast<std::size_t>((k * ns + j) * ns + i)];
            if (s.v.mem || s.c.f <= 0.0 || !s.v.have_xi) continue;
            const double ww = w * s.c.f;
            if (s.c.dx.squaredNorm() > 0.0) {
              const Vec3 xq = s.x + s.c.dx;
              const auto rq = polish_root(g, xq, s.v.xi, tol);
              if (rq && jacobian(g, *rq).detJ >= ambig_safe) {
                out.push_back({xq, ww, *rq});
                m_adopt += ww;
                ++n_interior_cut;
                continue;
              }
            }
            const Vec3 xc = s.v.xi.cwiseMax(-1.0 + 1e-9).cwiseMin(1.0 - 1e-9);
            if (jacobian(g, xc).detJ >= ambig_safe) {
              out.push_back({map_to_physical(g, xc), ww, xc});
              m_adopt += ww;
              continue;
            }
            Sample* best = nullptr;
            for (int dk = -1; dk <= 1; ++dk)
              for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                  const int ii = i + di, jj = j + dj, kk = k + dk;
                  if ((di == 0 && dj == 0 && dk == 0) || ii < 0 || jj < 0 ||
                      kk < 0 || ii >= ns || jj >= ns || kk >= ns)
                    continue;
                  Sample& n =
                      smp[static_cast<std::size_t>((kk * ns + jj) * ns + ii)];
                  if (n.v.mem && (!best || n.c.f > best->c.f)) best = &n;
                }
            if (best)
              best->c.f += s.c.f;
            else
              m_drop += ww;
          }
      for (const Sample& s : smp) {
        if (!s.v.mem || s.c.f <= 0.0) continue;
        const double ww = w * s.c.f;
        if (s.v.have_xi && s.c.dx.squaredNorm() > 0.0) {
          const Vec3 xq = s.x + s.c.dx;
          const auto rq = polish_root(g, xq, s.v.xi, tol);
          if (rq && jacobian(g, *rq).detJ >= ambig_safe) {
            out.push_back({xq, ww, *rq});
            m_interior_cut += ww;
            continue;
          }
        }
        out.push_back({s.x, ww, s.v.xi});
      }
      t_skin += now() - t0;
      return;
    }
    const double t_fold_start = now();
    const Vec3 h = (hi - lo) / static_cast<double>(nsub);
    const double w = (hi - lo).prod() / static_cast<double>(nsub * nsub * nsub);

    // Fold cell.  Each branch of the map gets its own Newton tracker.
    // A converged in-cube root with safely negative det J rejects the
    // point outright (the membership test rejects any point with a
    // negative preimage), which makes fold-interior runs cheap.  A root
    // on the positive branch supplies the surviving preimage but says
    // nothing about a fold pair, so those points root-count the boxes
    // where a negative root could hide: the ones whose det J interval
    // is not strictly positive.  Anything unclear goes through the full
    // test, whose root set reseeds both trackers.
    const double cushion = 1e-13 * std::max(g.scale, 1.0);
    const auto holds = [&](const CandBox& c, const Vec3& x) {
      for (int a = 0; a < 3; ++a)
        if (x[a] < c.range.lo[a] - cushion || x[a] > c.range.hi[a] + cushion)
          return false;
      return true;
    };
    const auto is_q = [&](const CandBox& c) {
      return !(c.dj.lo > fold_margin);
    };

    // Seed the positive tracker from the most solidly positive box.
    size_t seed_box = 0;
    double best_lo = -1e300;
    for (size_t c = 0; c < cands.size(); ++c)
      if (cands[c].dj.lo > best_lo) {
        best_lo = cands[c].dj.lo;
        seed_box = c;
      }

    // Both trackers march with the point grid, seeded per line from the
    // neighboring line rather than the far end of the previous one (the
    // fold surface cuts most scanlines, and a seed from across the cut
    // rarely converges).
    struct Trackers {
      Vec3 pos, neg;
      bool neg_live; // negative tracker has a usable seed
    };
    Trackers tk{0.5 * (cands[seed_box].box.lo + cands[seed_box].box.hi),
                Vec3::Zero(), false};

    std::vector<ParamBox> pruned;
    const auto resolve = [&](const Vec3& x, Trackers& t, Vec3* xp) {
      bool mem = false, settled = false;

      if (t.neg_live) {
        ++n_polish;
        if (auto nr = polish_root(g, x, t.neg, tol)) {
          if (jacobian(g, *nr).detJ <= -ambig_safe) {
            t.neg = *nr;
            settled = true; // rejected by negative witness
          }
        }
        if (!settled) t.neg_live = false;
      }

      if (!settled) {
        // One extended polish covers both cases: a root clearly inside
        // the cube follows the usual branch logic, one clearly outside
        // explains the point as exterior when the cell is locally
        // injective (no straddling candidate near it, every holding
        // candidate close to the root, healthy det J).
        ++n_polish;
        if (const auto pr = polish_root_extended(g, x, t.pos, tol)) {
          const double m = pr->cwiseAbs().maxCoeff();
          const double dj = jacobian(g, *pr).detJ;
          if (m <= 1.0 - 1e-9) {
            if (dj >= ambig_safe) {
              t.pos = *pr;
              pruned.clear();
              for (const CandBox& c : cands)
                if (is_q(c) && holds(c, x)) pruned.push_back(c.box);
              const RootSet qs =
                  invert_trilinear_boxes_light(g, x, tol, pruned);
              settled = true;
              if (qs.n_minus() == 0 && !qs.any_ambiguous()) {
                mem = true;
                *xp = *pr;
              } else {
                for (const Root& r : qs.roots)
                  if (r.sign < 0) {
                    t.neg = r.xi;
                    t.neg_live = true;
                  }
              }
            } else if (dj <= -ambig_safe) {
              // The positive tracker drifted onto the negative branch;
              // still a valid rejection witness.
              t.neg = *pr;
              t.neg_live = true;
              settled = true;
            }
          } else if (m >= 1.0 + 1e-9 && dj >= ambig_safe) {
            bool lone = true;
            for (const CandBox& c : cands) {
              if (!holds(c, x)) continue;
              if (is_q(c)) {
                lone = false;
                break;
              }
              double dist = 0.0;
              for (int a = 0; a < 3; ++a)
                dist = std::max({dist, c.box.lo[a] - (*pr)[a],
                                 (*pr)[a] - c.box.hi[a]});
              if (dist > 0.1) {
                lone = false;
                break;
              }
            }
            if (lone) {
              t.pos = *pr; // keep tracking the extended branch
              settled = true;
            }
          }
        } else {
          ++n_fb_nullopt;
        }
      }

      if (!settled) {
        ++n_fallback;
        ++n_member;
        pruned.clear();
        for (const CandBox& c : cands)
          if (holds(c, x)) pruned.push_back(c.box);
        const RootSet rs = invert_trilinear_boxes_light(g, x, tol, pruned);
        mem = !rs.any_ambiguous() && rs.n_plus() == 1 && rs.n_minus() == 0;
        if (mem) ++n_fb_mem;
        if (rs.roots.empty()) ++n_fb_rootless;
        for (const Root& r : rs.roots) {
          if (r.sign > 0 && mem) {
            *xp = r.xi;
            t.pos = r.xi;
          }
          if (r.sign < 0) {
            t.neg = r.xi;
            t.neg_live = true;
          }
        }
      }

      return mem;
    };

    for (int k = 0; k < nsub; ++k) {
      Trackers tj = tk;
      for (int j = 0; j < nsub; ++j) {
        Trackers ti = tj;
        for (int i = 0; i < nsub; ++i) {
          const Vec3 x = lo + h.cwiseProduct(Vec3(i + 0.5, j + 0.5, k + 0.5));
          Vec3 xp;
          const bool mem = resolve(x, ti, &xp);
          if (mem) out.push_back({x, w, xp});
          if (i == 0) {
            tj = ti;
            if (j == 0) tk = ti;
          }
        }
      }
    }
    t_fold += now() - t_fold_start;
  }

  // Membership at a point of a skin-only cell whose candidates are all
  // on the positive branch.  The tracked extended root is decisive when
  // it is the only explanation of the point: strictly inside the cube
  // means member, strictly outside means not.  Anything near the cube
  // boundary, in the fold band, or with an unexplained candidate falls
  // back to the full test.  The root (in-cube or extended) is reported
  // whenever one is known so the caller can weight by clip fractions.
  struct SkinVerdict {
    bool mem = false;
    bool have_xi = false;
    Vec3 xi = Vec3::Zero();
  };

  SkinVerdict skin_probe(const Vec3& x, const std::vector<CandBox>& cands,
                         Vec3& seed) const {
    SkinVerdict v;
    const auto full = [&] {
      ++n_fallback;
      v.mem = member(x, cands, &v.xi);
      v.have_xi = v.mem;
      return v;
    };
    // A point no candidate image can reach has no preimage, so it is
    // outside the element; the Newton attempt below could only diverge.
    const double cushion = 1e-13 * std::max(g.scale, 1.0);
    const auto holds = [&](const CandBox& c) {
      for (int k = 0; k < 3; ++k)
        if (x[k] < c.range.lo[k] - cushion ||
            x[k] > c.range.hi[k] + cushion)
          return false;
      return true;
    };
    bool reachable = false;
    for (const CandBox& c : cands)
      if (holds(c)) {
        reachable = true;
        break;
      }
    if (!reachable) return v;
    ++n_polish;
    const auto r = polish_root_extended(g, x, seed, tol);
    if (!r) return full();
    seed = *r;
    for (const CandBox& c : cands) {
      if (!holds(c)) continue;
      double dist = 0.0;
      for (int k = 0; k < 3; ++k)
        dist = std::max(
            {dist, c.box.lo[k] - (*r)[k], (*r)[k] - c.box.hi[k]});
      if (dist > 0.1) return full();
    }
    const double m = r->cwiseAbs().maxCoeff();
    if (m >= 1.0 + 1e-9) {
      v.xi = *r;
      v.have_xi = true;
      return v; // clearly outside, root kept for the fraction model
    }
    if (m <= 1.0 - 1e-9 && jacobian(g, *r).detJ >= ambig_safe) {
      v.mem = true;
      v.xi = *r;
      v.have_xi = true;
      return v;
    }
    return full();
  }

  // How much of an axis-aligned subcell of extents h lies inside the
  // element, and where that piece sits.  The root's distance to each
  // reference face is pushed to physical space and each face clips the
  // subcell as a slab: per axis the covered 1-D fraction is fa and the
  // covered span's centroid shifts by (1-fa)/2 of the subcell's width
  // along the face normal, away from the face.  Putting the weight at
  // the shifted point instead of the sample centre removes the layer of
  // one-sided first-moment error a cut cell otherwise leaves behind.
  struct Clip {
    double f = 1.0;       // covered fraction of the subcell
    Vec3 dx = Vec3::Zero(); // centroid of the covered piece, minus centre
  };

  Clip clip_model(const Vec3& xi, const Vec3& h) const {
    Clip cm;
    const JacobianEval je = jacobian(g, xi);
    if (!je.invertible) {
      cm.f = xi.cwiseAbs().maxCoeff() <= 1.0 ? 1.0 : 0.0;
      return cm;
    }
    for (int a = 0; a < 3 && cm.f > 0.0; ++a) {
      const double eta = 1.0 - std::abs(xi[a]); // > 0 inside the cube
      const Vec3 grad = je.inv_T.col(a);        // gradient of xi_a in x
      const double gn = grad.norm();
      if (gn <= 0.0) continue;
      const double dist = eta / gn; // signed distance to the face image
      double teff = 0.0;
      for (int c = 0; c < 3; ++c) teff += std::abs(grad[c] / gn) * h[c];
      if (teff <= 0.0) continue;
      const double fa = std::min(1.0, std::max(0.0, 0.5 + dist / teff));
      cm.f *= fa;
      if (fa < 1.0)
        cm.dx -= (1.0 - fa) * (0.5 * teff) *
                 ((xi[a] >= 0.0 ? 1.0 : -1.0) / gn) * grad;
    }
    return cm;
  }

  // Uniform-membership cell: emit the tensor Gauss rule on the regular
  // subgrid matched to the leaf size, tracking the positive branch by
  // marching seeds between neighboring subcell centers.
  void emit_uniform(const Vec3& lo, const Vec3& hi, int level,
                    const Vec3& center_root,
                    const std::vector<CandBox>& cands) {
    const int split = std::max(max_depth - 2 - level, 0);
    const int n = 1 << split;
    const Vec3 h = (hi - lo) / static_cast<double>(n);
    const Vec3 half = 0.5 * h;
    const double vol = h.prod();

    const auto track = [&](const Vec3& x, Vec3& seed) {
      Vec3 r;
      if (branch_root(x, seed, cands, &r)) seed = r;
      return seed;
    };

    Vec3 seed_k = center_root;
    for (int k = 0; k < n; ++k) {
      const double zc = lo[2] + h[2] * (k + 0.5);
      track(Vec3(lo[0] + half[0], lo[1] + half[1], zc), seed_k);
      Vec3 seed_j = seed_k;
      for (int j = 0; j < n; ++j) {
        const double yc = lo[1] + h[1] * (j + 0.5);
        track(Vec3(lo[0] + half[0], yc, zc), seed_j);
        Vec3 seed_i = seed_j;
        for (int i = 0; i < n; ++i) {
          const Vec3 c(lo[0] + h[0] * (i + 0.5), yc, zc);
          track(c, seed_i);
          for (const QuadPoint3& q : cell_rule) {
            const Vec3 x = c + half.cwiseProduct(q.xi);
            Vec3 xp;
            if (branch_root(x, seed_i, cands, &xp))
              out.push_back({x, vol * q.w / 8.0, xp});
          }
        }
      }
    }
  }

  void subdivide(const Vec3& lo, const Vec3& hi, int level,
                 const std::vector<CandBox>& cands) {
    const double t0 = now();
    const std::vector<CandBox> split =
        split_candidates(cands, target_side(level + 1));
    t_split += now() - t0;
    const Vec3 mid = 0.5 * (lo + hi);
    for (int oct = 0; oct < 8; ++oct) {
      Vec3 clo = lo, chi = hi;
      for (int k = 0; k < 3; ++k) {
        if (oct & (1 << k)) clo[k] = mid[k];
        else chi[k] = mid[k];
      }
      recurse(clo, chi, level + 1, split);
    }
  }
};

} // namespace

RegionQuadrature concave_region_quadrature(const Mesh& mesh, int elem,
                                           int depth, int cell_order) {
  if (depth < 2)
    throw ValidationError("concave_region_quadrature: depth must be >= 2");
  const ElementGeom geom = element_geom(mesh, elem);
  const ElementClass cls = classify_element(geom);
  if (cls.kind != ElementKind::Concave)
    throw GeometryError(
        "concave_region_quadrature: element is convex; use the standard "
        "tensor rule");

  const double s = std::max(geom.scale, 1e-300);
  Builder b{geom,
            depth,
            tensor_rule3(cell_order),
            1e-9 * s,
            1e-12 * s * s * s,
            1e-12 * std::max(s, 1.0),
            1e-7 * s * s * s,
            3,
            5,
            0,
            3e-3 * s * s * s,
            {}};
  b.recurse(geom.bbox_lo, geom.bbox_hi, 0,
            {b.make_cand({Vec3(-1, -1, -1), Vec3(1, 1, 1)})});

  std::fprintf(stderr,
               "[rq] member=%ld polish=%ld fallback=%ld risky_cells=%ld "
               "uniform_cells=%ld fb_nullopt=%ld fb_band=%ld fb_mem=%ld "
               "fb_rootless=%ld rim=%ld\n",
               b.n_member, b.n_polish, b.n_fallback, b.n_risky_cells,
               b.n_uniform_cells, b.n_fb_nullopt, b.n_fb_band, b.n_fb_mem,
               b.n_fb_rootless, b.n_rim_cells);
  std::fprintf(stderr,
               "[rq] refine=%.2f split=%.2f flags=%.2f uniform=%.2f skin=%.2f fold=%.2f\n",
               b.t_refine, b.t_split, b.t_flags, b.t_uniform, b.t_skin, b.t_fold);
  std::fprintf(stderr,
               "[rq] skin mass: bin=%.9f frac=%.9f adopt=%.9f drop=%.9f "
               "interior_cut=%.9f (n=%ld)\n",
               b.m_bin, b.m_frac, b.m_adopt, b.m_drop, b.m_interior_cut,
               b.n_interior_cut);
  if (b.out.empty())
    throw GeometryError(
        "concave_region_quadrature: no interior resolved at this depth");

  RegionQuadrature rq;
  rq.elem = elem;
  rq.depth = depth;
  rq.points = std::move(b.out);
  return rq;
}

} // namespace tfem
