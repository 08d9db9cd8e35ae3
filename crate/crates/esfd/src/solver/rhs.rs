//! Residual assembly: the four-phase stage pipeline.
//!
//! Phase 1a evaluates every unordered stencil pair once — numerical fluxes
//! along the pair's unit normal plus the entropy contractions the limiter
//! needs — in parallel against the immutable stage snapshot. Phase 1b
//! assembles and solves the per-node entropy constraint, writing
//! pre-symmetrized coefficients into disjoint per-node windows. Phase 2 is
//! the synchronized pairwise max-merge (symmetrization). Phase 3
//! accumulates nodal residuals, mirroring each pair flux with an exact IEEE
//! negation so the scheme is conservative to machine precision and
//! bit-reproducible for any thread count.

use rayon::prelude::*;
use smallvec::SmallVec;

use super::boundary::exterior_state;
use super::{LowFlux, Scheme, StageContext, System};
use crate::euler::{Entropy, State};
use crate::limiter::{
    assemble_ecav, assemble_kl, assemble_relaxed, expand_node_max, limiting_coefficients,
    solve_bounded, solve_relaxed, solve_unbounded, symmetrize_max, Feasibility,
};
use crate::sbp::{NormalEntry, NormalTable};
use crate::{Error, Result};

type Sv = SmallVec<[f64; 16]>;

/// Per-entry blending/viscosity coefficients with an explicit
/// symmetrization marker: blended residuals refuse unsymmetrized fields,
/// because only the pairwise-symmetric form is conservative.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    values: Vec<f64>,
    symmetrized: bool,
}

impl CoefficientField {
    /// A constant field (trivially symmetric).
    pub fn constant(value: f64, num_entries: usize) -> Self {
        CoefficientField { values: vec![value; num_entries], symmetrized: true }
    }

    /// Raw per-entry values; must be symmetrized before use in a residual.
    pub fn from_values(values: Vec<f64>) -> Self {
        CoefficientField { values, symmetrized: false }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }

    /// Pairwise max-merge; marks the field symmetric.
    pub fn symmetrize<const D: usize>(&mut self, table: &NormalTable<D>) {
        symmetrize_max(table, &mut self.values);
        self.symmetrized = true;
    }
}

/// Everything a pair evaluation produces. `fh`, `fl` and `du` are stored in
/// the canonical (low index -> high index) direction; the reverse direction
/// is their exact negation.
#[derive(Clone, Copy)]
struct PairData<const D: usize> {
    /// Central (high-order) flux along the canonical unit normal.
    fh: State<D>,
    /// Low-order flux (LxF or HLLC), same orientation.
    fl: State<D>,
    /// State jump `u_a - u_b` (artificial-viscosity direction vector).
    du: State<D>,
    /// Entropy-dissipation contraction: `(v_b - v_a)'(u_b - u_a)` for AV
    /// schemes, `(v_b - v_a)'(f^H - f^L)` for flux blending. Symmetric.
    jump: f64,
    /// Violation summand `(v_b - v_a)' f^H - (psi_b - psi_a) . nhat`.
    /// Symmetric.
    viol: f64,
    /// `|f^H|`, the violation noise floor. Symmetric.
    fscale: f64,
    /// Relaxed contractions `v_a' d` and `v_b' d` with `d = u_a - u_b`
    /// (AV) or `f^L - f^H` (blending); the reverse direction uses
    /// `(-y, -x)`.
    x: f64,
    y: f64,
}

impl<const D: usize> Default for PairData<D> {
    fn default() -> Self {
        PairData {
            fh: State::zero(),
            fl: State::zero(),
            du: State::zero(),
            jump: 0.0,
            viol: 0.0,
            fscale: 0.0,
            x: 0.0,
            y: 0.0,
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Needs {
    low: bool,
    av_delta: bool,
    entropy: bool,
    relaxed: bool,
}

/// Scratch buffers for one `System`; reusable across stages and steps.
pub struct Workspace<const D: usize> {
    ent: Vec<Entropy<D>>,
    pairs: Vec<PairData<D>>,
    bflux: Vec<State<D>>,
    a: Vec<f64>,
    theta: CoefficientField,
    ell: Vec<f64>,
    ell_node: Vec<f64>,
    node_b: Vec<f64>,
    node_adot: Vec<f64>,
    node_scale: Vec<f64>,
    r_h: Vec<State<D>>,
    r_l: Vec<State<D>>,
    last_fallbacks: usize,
    // Stepper scratch.
    pub(super) k: [Vec<State<D>>; 4],
    pub(super) stage: Vec<State<D>>,
    pub(super) trial: Vec<State<D>>,
}

impl<const D: usize> Workspace<D> {
    pub fn new(system: &System<D>) -> Self {
        let n = system.num_nodes();
        let ne = system.table().num_entries();
        let np = system.table().pairs().len();
        let nb = system.table().boundary().len();
        let zs = vec![State::zero(); n];
        Workspace {
            ent: vec![
                Entropy { eta: 0.0, v: State::zero(), psi: [0.0; D], flux: [0.0; D] };
                n
            ],
            pairs: vec![PairData::default(); np],
            bflux: vec![State::zero(); nb],
            a: vec![0.0; ne],
            theta: CoefficientField::constant(0.0, ne),
            ell: vec![0.0; ne],
            ell_node: vec![0.0; n],
            node_b: vec![0.0; n],
            node_adot: vec![0.0; n],
            node_scale: vec![0.0; n],
            r_h: zs.clone(),
            r_l: zs.clone(),
            last_fallbacks: 0,
            k: [zs.clone(), zs.clone(), zs.clone(), zs.clone()],
            stage: zs.clone(),
            trial: zs,
        }
    }

    /// Applied per-entry coefficients after the last stage evaluation
    /// (diffusion coefficients for AV schemes, blending weights excluding
    /// the positivity floor for flux blending).
    pub fn coefficients(&self) -> &CoefficientField {
        &self.theta
    }
}

/// Per-stage diagnostic summary.
#[derive(Clone, Copy, Debug)]
pub struct StageDiagnostics<const D: usize> {
    /// `max_i (b_i - a_i' theta_i)` over the solved entropy constraints
    /// (non-positive when every node satisfies its inequality).
    pub max_entropy_residual: f64,
    /// The same maximum relative to `1 + sum_e |n_e||f^H_e|` per node.
    pub max_entropy_residual_rel: f64,
    /// `sum_i |b_i| f^surf_i`: the total boundary flux leaving the domain.
    pub boundary_flux: State<D>,
    /// `sum_i |b_i| (v_i' f^surf_i - psi_i . bhat_i)`, the boundary entropy
    /// term (reported, not enforced).
    pub boundary_entropy: f64,
    /// Nodes where the constrained solve fell back (infeasible knapsack or
    /// infeasible relaxed row).
    pub fallbacks: usize,
}

impl<const D: usize> Default for StageDiagnostics<D> {
    fn default() -> Self {
        StageDiagnostics {
            max_entropy_residual: 0.0,
            max_entropy_residual_rel: 0.0,
            boundary_flux: State::zero(),
            boundary_entropy: 0.0,
            fallbacks: 0,
        }
    }
}

/// Splits `data` into per-node windows following CSR `offsets`.
fn windows<'a, T>(offsets: &[usize], data: &'a mut [T]) -> Vec<&'a mut [T]> {
    let n = offsets.len() - 1;
    let mut out = Vec::with_capacity(n);
    let mut rest = data;
    for i in 0..n {
        let (head, tail) = rest.split_at_mut(offsets[i + 1] - offsets[i]);
        out.push(head);
        rest = tail;
    }
    debug_assert!(rest.is_empty());
    out
}

impl<const D: usize> System<D> {
    pub fn workspace(&self) -> Workspace<D> {
        Workspace::new(self)
    }

    fn needs(&self) -> Needs {
        let s = self.config().scheme;
        Needs {
            low: s.blends_fluxes() || self.config().positivity.is_some(),
            av_delta: matches!(s, Scheme::Ecav | Scheme::Recav),
            entropy: s.is_limited(),
            relaxed: s.is_relaxed(),
        }
    }

    /// Phase 1a: flux and contraction evaluation, one task per pair.
    fn pair_phase(&self, u: &[State<D>], ws: &mut Workspace<D>, needs: Needs) {
        let gas = self.gas();
        let table = self.table();
        let low_flux = self.config().low_flux;
        let blends = self.config().scheme.blends_fluxes();
        let ent = &ws.ent;
        table
            .pairs()
            .par_iter()
            .zip(ws.pairs.par_iter_mut())
            .for_each(|(p, out)| {
                let nhat = &table.entry(p.e_ab).unit;
                let (i, j) = (p.a, p.b);
                let fh = gas.flux_central(&u[i], &u[j], nhat);
                out.fh = fh;
                out.fscale = fh.norm();
                if needs.low {
                    out.fl = match low_flux {
                        LowFlux::Lxf => gas.flux_lxf(&u[i], &u[j], nhat),
                        LowFlux::Hllc => gas.flux_hllc(&u[i], &u[j], nhat),
                    };
                }
                if needs.av_delta {
                    out.du = u[i] - u[j];
                }
                if needs.entropy {
                    let dv = ent[j].v - ent[i].v;
                    let mut dpsi = 0.0;
                    for k in 0..D {
                        dpsi += (ent[j].psi[k] - ent[i].psi[k]) * nhat[k];
                    }
                    out.viol = dv.dot(&fh) - dpsi;
                    out.jump = if blends { dv.dot(&(fh - out.fl)) } else { dv.dot(&(u[j] - u[i])) };
                    if needs.relaxed {
                        let d = if blends { out.fl - fh } else { u[i] - u[j] };
                        out.x = ent[i].v.dot(&d);
                        out.y = ent[j].v.dot(&d);
                    }
                }
            });
    }

    /// Weak boundary terms `|b_i| f^surf(u_i, u_i^BC, bhat_i)`.
    fn boundary_phase(&self, u: &[State<D>], ws: &mut Workspace<D>) {
        let gas = self.gas();
        let boundary = &self.config().boundary;
        ws.bflux
            .par_iter_mut()
            .zip(self.table().boundary().par_iter())
            .enumerate()
            .for_each(|(bi, (out, be))| {
                let ext = exterior_state(boundary, bi, be, &u[be.node]);
                *out = gas.flux_hllc(&u[be.node], &ext, &be.unit) * be.norm;
            });
    }

    /// Phase 3: nodal flux sums. `pair_flux` maps a pair index to its
    /// canonical-direction flux; the reverse direction is the exact
    /// negation.
    fn accumulate<F>(&self, ws_pairs: &[PairData<D>], bflux: &[State<D>], r: &mut [State<D>], pair_flux: F)
    where
        F: Fn(usize, &PairData<D>) -> State<D> + Sync,
    {
        let table = self.table();
        r.par_iter_mut().enumerate().for_each(|(i, ri)| {
            let mut acc = State::zero();
            for e in table.entries(i) {
                let p = e.pair as usize;
                let f = pair_flux(p, &ws_pairs[p]);
                acc += (if e.forward { f } else { -f }) * e.norm;
            }
            *ri = acc;
        });
        for (bi, be) in table.boundary().iter().enumerate() {
            r[be.node] += bflux[bi];
        }
    }

    /// High-order residual `r^H_i = sum_j |n_ij| f^H_ij + |b_i| f^surf_i`.
    ///
    /// `-M^-1 r^H` coincides with the direct flux-differencing derivative
    /// (an algebraic identity of the SBP operators).
    pub fn rhs_high_order(&self, u: &[State<D>], ws: &mut Workspace<D>, r: &mut [State<D>]) -> Result<()> {
        self.check_admissible(u, None)?;
        self.rhs_high_order_unchecked(u, ws, r);
        Ok(())
    }

    fn rhs_high_order_unchecked(&self, u: &[State<D>], ws: &mut Workspace<D>, r: &mut [State<D>]) {
        self.pair_phase(u, ws, Needs::default());
        self.boundary_phase(u, ws);
        self.accumulate(&ws.pairs, &ws.bflux, r, |_, pd| pd.fh);
    }

    /// Low-order residual with the configured dissipative flux.
    pub fn rhs_low_order(&self, u: &[State<D>], ws: &mut Workspace<D>, r: &mut [State<D>]) -> Result<()> {
        self.check_admissible(u, None)?;
        self.pair_phase(u, ws, Needs { low: true, ..Needs::default() });
        self.boundary_phase(u, ws);
        self.accumulate(&ws.pairs, &ws.bflux, r, |_, pd| pd.fl);
        Ok(())
    }

    /// Blended residual with caller-supplied coefficients: the AV flux
    /// `f^H + theta (u_i - u_j)` for viscosity schemes, the convex
    /// combination `(1 - theta) f^H + theta f^L` for flux blending.
    pub fn rhs_blended(
        &self,
        u: &[State<D>],
        coeffs: &CoefficientField,
        ws: &mut Workspace<D>,
        r: &mut [State<D>],
    ) -> Result<()> {
        if !self.config().scheme.is_limited() {
            return Err(Error::InvalidConfig(
                "blended residual requires an ecav/kl/recav/rkl scheme".into(),
            ));
        }
        if !coeffs.is_symmetrized() {
            return Err(Error::InvalidConfig(
                "blended residual requires symmetrized coefficients".into(),
            ));
        }
        if coeffs.values.len() != self.table().num_entries() {
            return Err(Error::LengthMismatch {
                expected: self.table().num_entries(),
                got: coeffs.values.len(),
            });
        }
        self.check_admissible(u, None)?;
        let blends = self.config().scheme.blends_fluxes();
        self.pair_phase(
            u,
            ws,
            Needs { low: blends, av_delta: !blends, ..Needs::default() },
        );
        self.boundary_phase(u, ws);
        // The supplied coefficients are the complete applied weights; no
        // positivity floor is added on this path.
        self.accumulate_weighted(&ws.pairs, &ws.bflux, &coeffs.values, None, r);
        Ok(())
    }

    /// Accumulation with per-entry weights `th` (plus an optional additive
    /// floor `ell` on the flux-blending path).
    fn accumulate_weighted(
        &self,
        pairs: &[PairData<D>],
        bflux: &[State<D>],
        th: &[f64],
        ell: Option<&[f64]>,
        r: &mut [State<D>],
    ) {
        let table = self.table();
        if self.config().scheme.blends_fluxes() {
            self.accumulate(pairs, bflux, r, |p, pd| {
                let e = table.pairs()[p].e_ab;
                let w = th[e] + ell.map_or(0.0, |l| l[e]);
                pd.fh * (1.0 - w) + pd.fl * w
            });
        } else {
            self.accumulate(pairs, bflux, r, |p, pd| {
                let e = table.pairs()[p].e_ab;
                pd.fh + pd.du * th[e]
            });
        }
    }

    /// The full per-stage pipeline: admissibility check, entropy and pair
    /// evaluation, positivity floors, constraint assembly and solve,
    /// symmetrization, residual accumulation, diagnostics.
    ///
    /// `ctx.fe_dt` is the forward-Euler substep the positivity floors must
    /// protect (the stage increment of an SSP stepper).
    pub fn stage_rhs(
        &self,
        u: &[State<D>],
        ctx: StageContext,
        ws: &mut Workspace<D>,
        r: &mut [State<D>],
        diag: Option<&mut StageDiagnostics<D>>,
    ) -> Result<()> {
        let scheme = self.config().scheme;
        match scheme {
            Scheme::HighOrder => {
                if ctx.check_admissibility {
                    self.check_admissible(u, Some(ctx.time))?;
                }
                self.rhs_high_order_unchecked(u, ws, r);
            }
            Scheme::LowOrder => {
                self.check_admissible(u, Some(ctx.time))?;
                self.pair_phase(u, ws, Needs { low: true, ..Needs::default() });
                self.boundary_phase(u, ws);
                self.accumulate(&ws.pairs, &ws.bflux, r, |_, pd| pd.fl);
            }
            _ => {
                self.check_admissible(u, Some(ctx.time))?;
                self.limited_stage(u, ctx, ws, r)?;
            }
        }
        if let Some(d) = diag {
            *d = self.stage_diagnostics(u, ws, scheme.is_limited());
        }
        Ok(())
    }

    fn limited_stage(
        &self,
        u: &[State<D>],
        ctx: StageContext,
        ws: &mut Workspace<D>,
        r: &mut [State<D>],
    ) -> Result<()> {
        let gas = self.gas();
        let needs = self.needs();

        // Entropy variables per node, then pair data, then boundary fluxes.
        ws.ent.par_iter_mut().zip(u.par_iter()).for_each(|(e, ui)| *e = gas.entropy(ui));
        self.pair_phase(u, ws, needs);
        self.boundary_phase(u, ws);

        // Positivity floors from the high/low residual pair.
        if let Some(pos) = self.config().positivity {
            let (r_h, r_l) = (&mut ws.r_h, &mut ws.r_l);
            let table = self.table();
            r_h.par_iter_mut().zip(r_l.par_iter_mut()).enumerate().for_each(|(i, (rh, rl))| {
                let mut ah = State::zero();
                let mut al = State::zero();
                for e in table.entries(i) {
                    let p = e.pair as usize;
                    let pd = &ws.pairs[p];
                    let (fh, fl) = if e.forward { (pd.fh, pd.fl) } else { (-pd.fh, -pd.fl) };
                    ah += fh * e.norm;
                    al += fl * e.norm;
                }
                *rh = ah;
                *rl = al;
            });
            for (bi, be) in table.boundary().iter().enumerate() {
                ws.r_h[be.node] += ws.bflux[bi];
                ws.r_l[be.node] += ws.bflux[bi];
            }
            limiting_coefficients(
                gas,
                u,
                &ws.r_h,
                &ws.r_l,
                self.mass(),
                ctx.fe_dt,
                pos.alpha,
                &mut ws.ell_node,
            )?;
            expand_node_max(self.table(), &ws.ell_node, &mut ws.ell);
        }

        self.solve_constraints(ws)?;
        ws.theta.symmetrize(self.table());

        // Post-symmetrization a' theta per node (the relaxed schemes filled
        // it during the solve, where their pre-symmetrization guarantee
        // lives).
        if !self.config().scheme.is_relaxed() {
            let table = self.table();
            let (a, th) = (&ws.a, &ws.theta.values);
            ws.node_adot.par_iter_mut().enumerate().for_each(|(i, adot)| {
                let mut s = 0.0;
                for e in table.range(i) {
                    s += a[e] * th[e];
                }
                *adot = s;
            });
        }

        let floor = self.config().positivity.map(|_| ws.ell.as_slice());
        self.accumulate_weighted(&ws.pairs, &ws.bflux, &ws.theta.values, floor, r);
        Ok(())
    }

    /// Phase 1b: per-node assembly and knapsack solve into disjoint
    /// windows.
    fn solve_constraints(&self, ws: &mut Workspace<D>) -> Result<()> {
        let scheme = self.config().scheme;
        let table = self.table();
        let offsets = table.offsets();
        let pairs = &ws.pairs;
        let ell = &ws.ell;

        ws.theta.symmetrized = false;
        let a_win = windows(offsets, &mut ws.a);
        let th_win = windows(offsets, &mut ws.theta.values);

        let fallbacks = a_win
            .into_par_iter()
            .zip(th_win)
            .zip(ws.node_b.par_iter_mut())
            .zip(ws.node_adot.par_iter_mut())
            .zip(ws.node_scale.par_iter_mut())
            .enumerate()
            .map(|(i, ((((aw, tw), node_b), node_adot), node_scale))| {
                let entries = table.entries(i);
                let m = entries.len();
                let mut norm = Sv::with_capacity(m);
                let mut jump = Sv::with_capacity(m);
                let mut viol = Sv::with_capacity(m);
                let mut fsc = Sv::with_capacity(m);
                for e in entries {
                    let pd = &pairs[e.pair as usize];
                    norm.push(e.norm);
                    jump.push(pd.jump);
                    viol.push(pd.viol);
                    fsc.push(pd.fscale);
                }
                *node_scale = norm.iter().zip(&fsc).map(|(n, f)| n * f).sum();
                let ellw = &ell[offsets[i]..offsets[i + 1]];

                match scheme {
                    Scheme::Ecav => {
                        let b = assemble_ecav(&norm, &jump, &viol, &fsc, aw);
                        *node_b = b;
                        if solve_unbounded(aw, b, tw) == Feasibility::Infeasible {
                            return Err(Error::Internal(format!(
                                "no dissipation available against entropy violation {b:e} at node {i}"
                            )));
                        }
                        Ok(0usize)
                    }
                    Scheme::Kl => {
                        let mut upper = Sv::from_elem(0.0, m);
                        let b = assemble_kl(&norm, &jump, &viol, &fsc, ellw, aw, &mut upper);
                        *node_b = b;
                        let feas = solve_bounded(aw, b, &upper, tw);
                        Ok((feas == Feasibility::Infeasible) as usize)
                    }
                    Scheme::Recav | Scheme::Rkl => self.solve_relaxed_node(
                        i, entries, &norm, &jump, &viol, &fsc, ellw, pairs, aw, tw, node_b,
                        node_adot,
                    ),
                    _ => unreachable!("unlimited scheme in constraint solve"),
                }
            })
            .try_reduce(|| 0, |x, y| Ok(x + y))?;

        if fallbacks > 0 {
            log::debug!("{fallbacks} node(s) used the dissipative knapsack fallback");
        }
        ws.last_fallbacks = fallbacks;
        Ok(())
    }

    /// Relaxed per-node solve: `m` per-edge columns plus the trailing tau
    /// column. Tau never enters the flux; it only relaxes the inequality.
    #[allow(clippy::too_many_arguments)]
    fn solve_relaxed_node(
        &self,
        i: usize,
        entries: &[NormalEntry<D>],
        norm: &[f64],
        jump: &[f64],
        viol: &[f64],
        fsc: &[f64],
        ellw: &[f64],
        pairs: &[PairData<D>],
        aw: &mut [f64],
        tw: &mut [f64],
        node_b: &mut f64,
        node_adot: &mut f64,
    ) -> Result<usize> {
        let m = entries.len();
        let mut xe = Sv::with_capacity(m);
        let mut ye = Sv::with_capacity(m);
        for e in entries {
            let pd = &pairs[e.pair as usize];
            if e.forward {
                xe.push(pd.x);
                ye.push(pd.y);
            } else {
                xe.push(-pd.y);
                ye.push(-pd.x);
            }
        }
        let mut a_rel = Sv::from_elem(0.0, m + 1);
        let mut sol = Sv::from_elem(0.0, m + 1);
        let b = assemble_relaxed(norm, &xe, &ye, viol, fsc, &mut a_rel);
        *node_b = b;

        let feasible = match self.config().scheme {
            Scheme::Recav => solve_relaxed(&a_rel, b, &mut sol).is_feasible(),
            Scheme::Rkl => {
                let mut upper = Sv::with_capacity(m + 1);
                for &l in ellw {
                    upper.push(1.0 - l);
                }
                upper.push(1.0);
                // The box solver's infeasible fallback (all-upper) is not
                // meaningful for the relaxed row; treat it as a signal to
                // drop back to the unrelaxed constraint below.
                if b > 0.0
                    && a_rel
                        .iter()
                        .zip(&upper)
                        .map(|(&ak, &uk)| if ak > 0.0 { ak * uk } else { 0.0 })
                        .sum::<f64>()
                        < b
                {
                    false
                } else {
                    solve_bounded(&a_rel, b, &upper, &mut sol).is_feasible()
                }
            }
            _ => unreachable!(),
        };

        if feasible {
            aw.copy_from_slice(&a_rel[..m]);
            tw.copy_from_slice(&sol[..m]);
            *node_adot = a_rel.iter().zip(&sol).map(|(a, t)| a * t).sum();
            Ok(0)
        } else {
            // Unrelaxed fallback at this node.
            match self.config().scheme {
                Scheme::Recav => {
                    let b2 = assemble_ecav(norm, jump, viol, fsc, aw);
                    *node_b = b2;
                    if solve_unbounded(aw, b2, tw) == Feasibility::Infeasible {
                        return Err(Error::Internal(format!(
                            "no dissipation available against entropy violation {b2:e} at node {i}"
                        )));
                    }
                }
                Scheme::Rkl => {
                    let mut upper = Sv::from_elem(0.0, m);
                    let b2 = assemble_kl(norm, jump, viol, fsc, ellw, aw, &mut upper);
                    *node_b = b2;
                    solve_bounded(aw, b2, &upper, tw);
                }
                _ => unreachable!(),
            }
            *node_adot = aw.iter().zip(tw.iter()).map(|(a, t)| a * t).sum();
            Ok(1)
        }
    }

    fn stage_diagnostics(
        &self,
        u: &[State<D>],
        ws: &Workspace<D>,
        limited: bool,
    ) -> StageDiagnostics<D> {
        let gas = self.gas();
        let mut d = StageDiagnostics::default();
        if limited {
            let (raw, rel) = ws
                .node_b
                .par_iter()
                .zip(ws.node_adot.par_iter())
                .zip(ws.node_scale.par_iter())
                .map(|((b, adot), scale)| {
                    let resid = b - adot;
                    (resid, resid / (1.0 + scale))
                })
                .reduce(
                    || (f64::NEG_INFINITY, f64::NEG_INFINITY),
                    |x, y| (x.0.max(y.0), x.1.max(y.1)),
                );
            d.max_entropy_residual = raw;
            d.max_entropy_residual_rel = rel;
            d.fallbacks = ws.last_fallbacks;
        }
        for (bi, be) in self.table().boundary().iter().enumerate() {
            let ent = gas.entropy(&u[be.node]);
            let mut psi_n = 0.0;
            for k in 0..D {
                psi_n += ent.psi[k] * be.unit[k];
            }
            d.boundary_flux += ws.bflux[bi];
            d.boundary_entropy += ent.v.dot(&ws.bflux[bi]) - be.norm * psi_n;
        }
        d
    }
}
