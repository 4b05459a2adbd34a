"""Command-line front end.

Usage::

    hbern COMMAND [--config FILE] [surface flags] [options]

Commands: ``curvature``, ``variation``, ``instability``, ``reduce`` and
``highdim``.  The primary JSON record goes to stdout (sorted keys, so the
output is byte-identical for identical inputs); ``--json`` and ``--csv``
write copies / tables to files.

A config file holds ``key = value`` lines in one section per command.  Keys
are the long flag names with dashes replaced by underscores; surface keys
are ``surface`` (strip, graph-xy, graph-yt, plane, cylinder) plus that
kind's fields (``G``, ``I``, ``branch``, ``f``, ``psi``, ``a``, ``b``, ``c``,
``gamma``, ``R``).  Flags given on the command line win.

Exit codes: 0 success, 2 input error, 3 not applicable, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bernstein, hcalc, highdim, instability, variation
from .bumps import ball_bump, box_bump
from .gexpr import ClosedForm, ExprArityError, ExprSyntaxError, as_function, builtin
from .hgroup import EuclideanPlane
from .jets import DomainError
from .quadrature import QuadratureError, QuadratureSpec
from .surfaces import (
    DEFAULT_WINDOW,
    GraphicalStrip,
    NotApplicable,
    Surface,
    circle_cylinder,
    graph_xy_new,
    graph_yt_new,
    plane_surface,
    strip_new,
)

EXIT_OK, EXIT_INPUT, EXIT_NA, EXIT_NUMERIC = 0, 2, 3, 4

SURFACE_KINDS = ("strip", "graph-xy", "graph-yt", "plane", "cylinder")
_SURFACE_FIELDS = {
    "strip": ("G", "I", "branch"),
    "graph-xy": ("f",),
    "graph-yt": ("psi",),
    "plane": ("a", "b", "c", "gamma"),
    "cylinder": ("R",),
}


class InputError(ValueError):
    """Bad flags, config values or surface specifications."""


# surface specifications

def _floats(text, n=None, name="value"):
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        try:
            vals = [float(v) for v in str(text).split(",") if v.strip() != ""]
        except ValueError:
            raise InputError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise InputError(f"{name}: expected {n} numbers, got {len(vals)}")
    return vals


def _profile(text):
    """``@name`` or ``@name(p1, p2)`` selects a closed-form profile."""
    text = text.strip()
    if not text.startswith("@"):
        return as_function(text, ("t",))
    m = re.fullmatch(r"@(\w+)(?:\((.*)\))?", text)
    if not m:
        raise InputError(f"bad builtin profile {text!r}")
    params = _floats(m.group(2), name="profile parameters") if m.group(2) else []
    try:
        return builtin(m.group(1), *params)
    except KeyError as e:
        raise InputError(str(e.args[0])) from None


def surface_from_spec(spec, window=None):
    """Build a surface from a flat dict of strings (config or flag values)."""
    kind = spec.get("surface")
    if kind not in SURFACE_KINDS:
        raise InputError(f"surface must be one of {', '.join(SURFACE_KINDS)}")
    missing = [k for k in _SURFACE_FIELDS[kind] if k not in spec and k not in ("I", "branch")]
    if missing:
        raise InputError(f"surface {kind} needs {', '.join(missing)}")
    box = None if window is None else (tuple(window), tuple(window))
    if kind == "strip":
        I = _floats(spec.get("I", "-inf,inf"), 2, "I")
        win = DEFAULT_WINDOW if window is None else tuple(window)
        return strip_new(_profile(spec["G"]), tuple(I), spec.get("branch", "X"),
                         window=win, y_window=win)
    if kind == "graph-xy":
        return graph_xy_new(as_function(spec["f"], ("x", "y")), *([box] if box else []))
    if kind == "graph-yt":
        return graph_yt_new(as_function(spec["psi"], ("y", "t")), *([box] if box else []))
    if kind == "plane":
        a, b, c, g = (float(spec[k]) for k in ("a", "b", "c", "gamma"))
        if a == b == c == 0:
            raise InputError("plane needs (a, b, c) != 0")
        return plane_surface(EuclideanPlane(a, b, c, g), *([box] if box else []))
    R = float(spec["R"])
    if not R > 0:
        raise InputError("cylinder radius must be positive")
    return circle_cylinder(R, None if window is None else
                           ((0.0, 2 * math.pi * R), tuple(window)))


def surface_to_spec(surface):
    """Inverse of :func:`surface_from_spec` (strings, ready for a config file)."""
    if isinstance(surface, GraphicalStrip):
        G = surface.G
        src = getattr(G, "source", None)
        if isinstance(G, ClosedForm):
            args = ", ".join(repr(p) for p in G.params)
            src = f"@{G.name}({args})" if args else f"@{G.name}"
        if src is None:
            raise InputError("strip profile has no text form")
        return {"surface": "strip", "G": src,
                "I": ",".join(repr(float(v)) for v in surface.interval),
                "branch": surface.branch}
    kind, p = surface.kind, surface.params
    if kind in ("graph-xy", "graph-yt"):
        key = "f" if kind == "graph-xy" else "psi"
        return {"surface": kind, key: p[key].source}
    if kind in ("plane", "vertical-plane"):
        return {"surface": "plane", "a": repr(float(p["a"])), "b": repr(float(p["b"])),
                "c": repr(float(p.get("c", 0.0))), "gamma": repr(float(p["gamma"]))}
    if kind == "cylinder":
        return {"surface": "cylinder", "R": repr(float(p["R"]))}
    raise InputError(f"surface kind {kind!r} has no config form")


# JSON records

def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def dumps(record):
    return json.dumps(_clean(record), sort_keys=True, indent=2) + "\n"


def _measure(value, error):
    return {"value": value, "error": error}


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def worker_count():
    raw = os.environ.get("HBERN_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"HBERN_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError("HBERN_THREADS must be a positive integer")
    return n


# commands

def _quad_spec(opts):
    tol = opts.get("quad_tol")
    return QuadratureSpec() if tol is None else QuadratureSpec(rtol=float(tol))


def _default_support(surface):
    (u0, u1), (v0, v1) = surface.patch.domain
    cu, cv = 0.5 * (u0 + u1), 0.5 * (v0 + v1)
    hu, hv = 0.25 * (u1 - u0), 0.25 * (v1 - v0)
    return ((cu - hu, cu + hu), (cv - hv, cv + hv))


def cmd_curvature(surface, opts):
    grid = int(opts.get("grid") or 101)
    if grid < 2:
        raise InputError("grid must be at least 2")
    patch = surface.patch
    (u0, u1), (v0, v1) = patch.domain
    U, V = np.meshgrid(np.linspace(u0, u1, grid), np.linspace(v0, v1, grid), indexing="ij")
    fr = hcalc.frame_from_patch(patch, U, V)
    char_eps = float(opts.get("char_eps") or 1e-6)
    keep = fr.W > char_eps * (1 + fr.N)
    H = np.full(U.shape, np.nan)
    route_gap = np.full(U.shape, np.nan)
    if np.any(keep):
        u, v = U[keep], V[keep]
        Hd = hcalc.hmean_samples(surface, u, v)
        Hp = hcalc.hmean_patch(patch, u, v)
        H[keep] = Hd
        route_gap[keep] = np.abs(Hd - Hp)
    scan = hcalc.characteristic_scan(patch, grid=min(grid, 129))
    pts = np.array([c.point for c in scan]) if scan else np.zeros((0, 3))
    sigma = {
        "count": len(scan),
        "points": [list(c.point) for c in scan[:20]],
        "max_W": max((c.W for c in scan), default=0.0),
        "extent": None if not scan else [pts.min(axis=0).tolist(), pts.max(axis=0).tolist()],
        "excluded_grid_points": int(np.sum(~keep)),
    }
    if opts.get("csv"):
        x, y, t = patch.point(U, V)
        rows = zip(U.ravel(), V.ravel(), x.ravel(), y.ravel(), t.ravel(), fr.W.ravel(),
                   H.ravel())
        _write_csv(opts["csv"], ["u", "v", "x", "y", "t", "W", "H"], rows)
    finite = np.isfinite(H)
    return {
        "command": "curvature",
        "surface": surface.describe(),
        "window": [list(patch.domain[0]), list(patch.domain[1])],
        "points": int(np.sum(finite)),
        "max_abs_H": _measure(float(np.max(np.abs(H[finite]))) if np.any(finite) else None,
                              float(np.max(route_gap[finite])) if np.any(finite) else None),
        "sigma": sigma,
    }


def _fd_record(fd):
    return {"value": fd.value, "error": fd.uncertainty, "step": fd.step,
            "quad_error": fd.quad_error}


def _quad_record(res):
    return {"value": float(res.value), "error": float(res.error)}


def cmd_variation(surface, opts):
    family = opts.get("family") or "normal-bump"
    spec = _quad_spec(opts)
    fd_step = None if opts.get("fd_step") is None else float(opts["fd_step"])
    out = {"command": "variation", "surface": surface.describe(), "family": family}
    if family == "fk":
        if not isinstance(surface, GraphicalStrip):
            raise InputError("family fk needs a strip surface")
        J = None if opts.get("J") is None else _floats(opts["J"], 2, "J")
        cert = instability.certify_instability(surface, J, spec=None, fd_check=True)
        out.update({
            "k": cert["k0"], "J": cert["J"], "delta": cert["delta"],
            "second": {"formula": _measure(cert["v2"], cert["quad_err"]),
                       "numeric": _measure(cert["v2_fd"], cert["v2_fd_uncertainty"])},
        })
        return out
    support = _support(surface, opts)
    out["support"] = [list(support[0]), list(support[1])]
    patch = surface.patch
    if family == "normal-bump":
        center = tuple(0.5 * (lo + hi) for lo, hi in support)
        radius = tuple(0.5 * (hi - lo) for lo, hi in support)

        def h(U, V):
            return box_bump(U, V, center, radius)

        X = variation.normal_field(h, support, ambient=False)
        formula = variation.second_variation_normal_formula(surface, h, support, spec,
                                                            ambient=False)
        out["first"] = _fd_record(variation.first_variation_numeric(patch, X, fd_step, spec,
                                                                    "trapezoid"))
        out["second"] = {"formula": _quad_record(formula),
                         "numeric": _fd_record(variation.second_variation_numeric(
                             patch, X, fd_step, spec, "trapezoid"))}
        return out
    if family == "x1-bump":
        c = [float(v) for v in patch.point(*(0.5 * (lo + hi) for lo, hi in support))]
        radius = 0.5 * min(hi - lo for lo, hi in support)

        def a(x, y, t):
            return ball_bump((x, y, t), c, radius)

        X = variation.ambient_field(a=a, support=support)
        formula = variation.second_variation_x1_formula(surface, a, support, spec)
        out["bump"] = {"center": c, "radius": radius}
        out["first"] = _fd_record(variation.first_variation_numeric(patch, X, fd_step, spec,
                                                                    "trapezoid"))
        out["second"] = {"formula": _quad_record(formula),
                         "numeric": _fd_record(variation.second_variation_numeric(
                             patch, X, fd_step, spec, "trapezoid"))}
        return out
    if family == "random":
        samples = int(opts.get("samples") or 5)
        seed = int(opts.get("seed") or 0)
        out["seed"] = seed
        if surface.kind == "vertical-plane":
            rng = np.random.default_rng(seed)
            res = variation.vertical_plane_stability(
                surface, rng, samples, support,
                spec=None if opts.get("quad_tol") is None else spec)
            out["samples"] = [{"second": _fd_record(s.v2),
                               "z_squared": _measure(s.z_squared, s.z_error),
                               "rel_diff": s.rel_diff} for s in res]
            out["min_second"] = min(s.v2.value for s in res)
            out["stable"] = all(s.v2.value >= -1e-8 for s in res)
            return out
        seeds = np.random.SeedSequence(seed).spawn(samples)

        def one(ss):
            X = variation.random_deformation(np.random.default_rng(ss), support)
            return {
                "first": _fd_record(variation.first_variation_numeric(patch, X, fd_step, spec,
                                                                      "trapezoid")),
                "second": _fd_record(variation.second_variation_numeric(
                    patch, X, fd_step, spec, "trapezoid")),
            }

        with ThreadPoolExecutor(max_workers=worker_count()) as ex:
            out["samples"] = list(ex.map(one, seeds))
        return out
    raise InputError(f"unknown family {family!r}")


def _support(surface, opts):
    if opts.get("support") is None:
        return _default_support(surface)
    u0, u1, v0, v1 = _floats(opts["support"], 4, "support")
    if not (u1 > u0 and v1 > v0):
        raise InputError("support box is empty")
    return ((u0, u1), (v0, v1))


def cmd_instability(surface, opts):
    if not isinstance(surface, GraphicalStrip):
        raise InputError("instability needs a strip surface")
    if not surface.is_strict:
        raise NotApplicable("strip is not strict: G' > 0 fails on the whole interval")
    J = None if opts.get("J") is None else _floats(opts["J"], 2, "J")
    cert = instability.certify_instability(surface, J, fd_check=not opts.get("no_fd"))
    cert = dict(cert)
    cert["gap"] = _measure(cert["gap"], cert["quad_err"])
    if "v2_fd" in cert:
        cert["v2_fd"] = _measure(cert.pop("v2_fd"), cert.pop("v2_fd_uncertainty"))
    return {"command": "instability", "surface": surface.describe(), "certificate": cert}


def _vertical_plane_of(surface, probe):
    """The vertical plane ``x = alpha y + beta`` behind a graph with
    ``psi_t = 0``; raises if psi is not affine in y."""
    psi = surface.params["psi"]
    (y0, y1), (t0, t1) = probe
    ys = np.linspace(y0, y1, 9)
    ts = np.full_like(ys, 0.5 * (t0 + t1))
    vals = np.asarray(psi(ys, ts), float)
    alpha, beta = np.polyfit(ys, vals, 1)
    resid = float(np.max(np.abs(vals - (alpha * ys + beta))))
    if resid > 1e-9 * (1 + float(np.max(np.abs(vals)))):
        raise NotApplicable("psi does not depend on t but is not affine in y")
    return float(alpha), float(beta)


def cmd_reduce(surface, opts):
    if not (isinstance(surface, Surface) and surface.kind == "graph-yt"):
        raise InputError("reduce needs a graph-yt surface (x = psi(y, t))")
    probe = None
    if opts.get("probe") is not None:
        y0, y1, t0, t1 = _floats(opts["probe"], 4, "probe")
        probe = ((y0, y1), (t0, t1))
    out = {"command": "reduce", "surface": surface.describe()}
    try:
        ext = bernstein.extract_strip(surface, probe)
    except bernstein.ReductionError as e:
        out.update({"status": "rejected", "stage": e.stage, "reason": str(e),
                    "details": e.details, "trace": e.trace})
        if e.stage == "psi_t" and opts.get("then_certify"):
            alpha, beta = _vertical_plane_of(surface, probe or surface.patch.domain)
            plane = plane_surface(EuclideanPlane(1.0, -alpha, 0.0, beta))
            seed = int(opts.get("seed") or 0)
            res = variation.vertical_plane_stability(
                plane, np.random.default_rng(seed), int(opts.get("samples") or 5))
            out["status"] = "stable-plane"
            out["stability"] = {
                "plane": plane.describe(),
                "seed": seed,
                "samples": [{"second": _fd_record(s.v2),
                             "z_squared": _measure(s.z_squared, s.z_error),
                             "rel_diff": s.rel_diff} for s in res],
                "min_second": min(s.v2.value for s in res),
                "stable": all(s.v2.value >= -1e-8 for s in res),
            }
            return out
        raise _Rejected(out, e) from None
    out.update({"status": "extracted", **ext.describe()})
    if opts.get("then_certify"):
        cert = instability.certify_instability(ext.strip, fd_check=not opts.get("no_fd"))
        cert["gap"] = _measure(cert["gap"], cert["quad_err"])
        if "v2_fd" in cert:
            cert["v2_fd"] = _measure(cert.pop("v2_fd"), cert.pop("v2_fd_uncertainty"))
        out["certificate"] = cert
        out["status"] = "unstable"
    if opts.get("csv"):
        G = ext.G
        ts = np.linspace(*ext.interval, 201)
        _write_csv(opts["csv"], ["t", "G", "dG"], zip(ts, G(ts), G.derivative(1)(ts)))
    return out


class _Rejected(Exception):
    def __init__(self, record, cause):
        super().__init__(str(cause))
        self.record = record


def _positive_ints(text):
    try:
        vals = [int(v) for v in str(text).split(",")]
    except ValueError:
        raise InputError(f"n must be a comma-separated list of positive integers: {text!r}") \
            from None
    if not vals or any(v < 1 for v in vals):
        raise InputError("n must be positive")
    return vals


def cmd_highdim(opts):
    ns = _positive_ints(opts.get("n") or "1,2,3")
    R = float(opts.get("R") or 1.5)
    if not R > 0:
        raise InputError("R must be positive")
    rng = np.random.default_rng(int(opts.get("seed") or 0))
    curv = []
    perim = []
    for n in ns:
        C = highdim.sphere_cylinder(n, R)
        z = rng.normal(size=(2 * n, 200))
        radii = rng.uniform(0.5 * R, 2 * R, 200)
        z = z / np.linalg.norm(z, axis=0) * radii
        H = highdim.cylinder_hmean(C, list(z))
        err = np.abs(H - (2 * n - 1) / radii)
        on = z / radii * R
        Hs = highdim.cylinder_hmean(C, list(on))
        curv.append({"n": n, "points": 400, "on_sphere": _measure((2 * n - 1) / R,
                                                                  float(np.max(np.abs(
                                                                      Hs - (2 * n - 1) / R)))),
                     "max_abs_error": float(max(np.max(err),
                                                np.max(np.abs(Hs - (2 * n - 1) / R))))})
        if n > 4:
            continue
        for box in sphere_windows(n):
            chk = highdim.cylinder_perimeter_check(highdim.sphere_patch(n, R), n, box)
            exact = highdim.sphere_patch_area(n, R, box)
            perim.append({"n": n, "window": [list(b) for b in box],
                          "sigma_h": _measure(chk.sigma_h, chk.change),
                          "hausdorff": _measure(chk.hausdorff, chk.change),
                          "closed_form": exact, "rel_diff": chk.rel_diff})
    # unit normal of a cylinder over a minimal graph (Scherk's surface, n = 2)
    scherk = "log(cos(y1)/cos(x1))"
    pts = rng.uniform(-1.2, 1.2, size=(4, 200))
    _, div = highdim.negative_example_nu(scherk, 2, list(pts))
    divergence = {"f": scherk, "n": 2, "points": 200,
                  "max_abs_div": _measure(float(np.max(np.abs(div))), None)}
    if opts.get("csv"):
        _write_csv(opts["csv"], ["n", "sigma_h", "hausdorff", "rel_diff"],
                   [(r["n"], r["sigma_h"]["value"], r["hausdorff"]["value"], r["rel_diff"])
                    for r in perim])
    return {"command": "highdim", "R": R, "curvature": curv, "perimeter": perim,
            "divergence": divergence}


SPHERE_WINDOWS = (
    ((0.3, 1.2), (0.2, 1.5), (-0.5, 0.7)),
    ((1.2, 2.0), (2.0, 3.0), (0.0, 1.0)),
    ((0.6, 1.4), (4.0, 5.0), (-2.0, -1.0)),
)


def sphere_windows(n):
    """Three parameter windows for :func:`highdim.sphere_patch`: polar angles
    share one range, the last angle and t get their own."""
    return [tuple([polar] * (2 * n - 2) + [last, t]) for polar, last, t in SPHERE_WINDOWS]


# argument handling

_COMMON = ("config", "json", "csv", "quad_tol", "fd_step", "seed", "window")


def build_parser():
    p = argparse.ArgumentParser(prog="hbern", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, surface=True):
        sp.add_argument("--config", help="config file with a section per command")
        sp.add_argument("--json", help="also write the JSON record here")
        sp.add_argument("--csv", help="write the command's table here")
        sp.add_argument("--quad-tol", type=float, help="relative quadrature tolerance")
        sp.add_argument("--fd-step", type=float, help="finite-difference step")
        sp.add_argument("--seed", type=int, help="seed for random sampling")
        sp.add_argument("--window", help="lo,hi box for each patch parameter")
        if surface:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--strip", metavar="G=EXPR",
                           help="strip x = y G(t); EXPR may be @tan_tanh, @affine(a,b), ...")
            g.add_argument("--graph-xy", metavar="f=EXPR", help="graph t = f(x, y)")
            g.add_argument("--graph-yt", metavar="psi=EXPR", help="graph x = psi(y, t)")
            g.add_argument("--plane", metavar="a,b,c,gamma", help="plane ax + by + ct = gamma")
            g.add_argument("--cylinder", metavar="R", help="vertical cylinder x^2 + y^2 = R^2")
            sp.add_argument("--I", dest="I", metavar="lo,hi", help="strip interval")
            sp.add_argument("--branch", choices=("X", "Y"), help="strip branch")

    c = sub.add_parser("curvature", help="mean curvature on a grid and characteristic scan")
    common(c)
    c.add_argument("--grid", type=int, help="grid points per axis (default 101)")
    c.add_argument("--char-eps", type=float, help="relative W floor for excluded points")

    v = sub.add_parser("variation", help="first and second variation")
    common(v)
    v.add_argument("--family", choices=("normal-bump", "x1-bump", "random", "fk"))
    v.add_argument("--support", metavar="u0,u1,v0,v1")
    v.add_argument("--samples", type=int)
    v.add_argument("--J", metavar="a,b", help="window for the fk family")

    i = sub.add_parser("instability", help="negative-gap certificate for a strip")
    common(i)
    i.add_argument("--J", metavar="a,b", help="window inside the strict interval")
    i.add_argument("--no-fd", action="store_true", default=None,
                   help="skip the finite-difference cross-check")

    r = sub.add_parser("reduce", help="reduce a graph x = psi(y, t) to a strip")
    common(r)
    r.add_argument("--probe", metavar="y0,y1,t0,t1", help="probe box in (y, t)")
    r.add_argument("--then-certify", action="store_true", default=None)
    r.add_argument("--no-fd", action="store_true", default=None)
    r.add_argument("--samples", type=int, help="random fields for a plane's stability report")

    h = sub.add_parser("highdim", help="vertical cylinders in H^n")
    common(h, surface=False)
    h.add_argument("--n", help="comma-separated dimensions (default 1,2,3)")
    h.add_argument("--R", help="sphere radius (default 1.5)")
    return p


def _surface_flags(ns):
    for flag, kind, key in (("strip", "strip", "G"), ("graph_xy", "graph-xy", "f"),
                            ("graph_yt", "graph-yt", "psi")):
        val = getattr(ns, flag, None)
        if val is not None:
            name, eq, expr = val.partition("=")
            if not eq or name.strip() != key:
                raise InputError(f"--{flag.replace('_', '-')} expects {key}=EXPR")
            return {"surface": kind, key: expr}
    if getattr(ns, "plane", None) is not None:
        a, b, c, g = _floats(ns.plane, 4, "plane")
        return {"surface": "plane", "a": a, "b": b, "c": c, "gamma": g}
    if getattr(ns, "cylinder", None) is not None:
        return {"surface": "cylinder", "R": ns.cylinder}
    return None


def _load_config(path, command):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as e:
        raise InputError(f"cannot read config: {e}") from None
    except configparser.Error as e:
        raise InputError(f"bad config: {e}") from None
    return dict(cp[command]) if cp.has_section(command) else {}


def resolve(ns):
    """Merge config-file values with flags; flags win.  Returns
    ``(surface spec or None, options)``."""
    cfg = _load_config(ns.config, ns.command) if ns.config else {}
    opts = {k: v for k, v in cfg.items() if k != "surface" and
            k not in sum(_SURFACE_FIELDS.values(), ())}
    for k, v in vars(ns).items():
        if v is not None and k not in ("command", "strip", "graph_xy", "graph_yt", "plane",
                                       "cylinder", "I", "branch"):
            opts[k] = v
    for flag in ("then_certify", "no_fd"):
        if isinstance(opts.get(flag), str):
            opts[flag] = opts[flag].strip().lower() in ("1", "true", "yes", "on")
    spec = _surface_flags(ns)
    if spec is None and "surface" in cfg:
        spec = {k: v for k, v in cfg.items()
                if k == "surface" or k in _SURFACE_FIELDS.get(cfg["surface"], ())}
    if spec is not None:
        if getattr(ns, "I", None) is not None:
            spec["I"] = ns.I
        if getattr(ns, "branch", None) is not None:
            spec["branch"] = ns.branch
    return spec, opts


def run(argv=None):
    """Run a command; returns ``(exit code, JSON record, --json path)``."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    spec, opts = resolve(ns)
    window = None if opts.get("window") is None else _floats(opts["window"], 2, "window")
    if window is not None and not window[1] > window[0]:
        raise InputError("window must satisfy lo < hi")
    if ns.command == "highdim":
        return EXIT_OK, cmd_highdim(opts), opts.get("json")
    if spec is None:
        parser.error(f"{ns.command} needs a surface (--strip, --graph-xy, --graph-yt, "
                     "--plane, --cylinder or a config 'surface' key)")
    surface = surface_from_spec(spec, window)
    cmd = {"curvature": cmd_curvature, "variation": cmd_variation,
           "instability": cmd_instability, "reduce": cmd_reduce}[ns.command]
    return EXIT_OK, cmd(surface, opts), opts.get("json")


def _error_record(status, exc, **extra):
    return {"status": status, "error": type(exc).__name__, "message": str(exc), **extra}


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    json_path = None
    try:
        code, record, json_path = run(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except _Rejected as e:
        code, record = EXIT_NA, e.record
    except (ExprSyntaxError, ExprArityError) as e:
        stderr.write(f"hbern: parse error: {e}\n")
        code = EXIT_INPUT
        record = _error_record("input-error", e, offset=getattr(e, "offset", None))
    except NotApplicable as e:
        code, record = EXIT_NA, _error_record("not-applicable", e)
    except (QuadratureError, FloatingPointError, ArithmeticError, DomainError,
            np.linalg.LinAlgError) as e:
        stderr.write(f"hbern: numeric failure: {e}\n")
        code, record = EXIT_NUMERIC, _error_record("numeric-failure", e)
    except (InputError, ValueError, KeyError, TypeError) as e:
        stderr.write(f"hbern: {e}\n")
        code, record = EXIT_INPUT, _error_record("input-error", e)
    text = dumps(record)
    stdout.write(text)
    json_path = json_path or _json_flag(argv)
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return code


def _json_flag(argv):
    argv = list(sys.argv[1:] if argv is None else argv)
    for i, a in enumerate(argv):
        if a == "--json" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--json="):
            return a.split("=", 1)[1]
    return None


if __name__ == "__main__":
    sys.exit(main())
