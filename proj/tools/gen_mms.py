#!/usr/bin/env python3
"""Generates src/mms_forcing.cpp: the manufactured 2-D solution and the body
forces that make it exact for

    u_t + u.grad u - mu Lap u + grad p = -lambda div(F^T F) + f,   div u = 0
    F_t + u.grad F + F grad u = gamma Lap F + g
"""
import pathlib
import sympy as sp

x, y, t, beta, mu, lam, gam = sp.symbols("x y t beta mu lambda gamma", real=True)
X = (x, y)
pi = sp.pi
decay = sp.exp(-t)

u = sp.Matrix([sp.sin(pi * x) ** 2 * sp.sin(2 * pi * y),
               -sp.sin(2 * pi * x) * sp.sin(pi * y) ** 2]) * decay
p = decay * sp.cos(pi * x) * sp.cos(pi * y)
F = decay * sp.sin(pi * x) * sp.sin(pi * y) * beta * sp.Matrix([[1, sp.Rational(1, 2)],
                                                                 [-sp.Rational(1, 2), 1]])
assert sp.simplify(sum(sp.diff(u[k], X[k]) for k in range(2))) == 0

def grad_vec(v):  # (grad v)_{jk} = d v_j / d x_k
    return sp.Matrix(2, 2, lambda j, k: sp.diff(v[j], X[k]))

def lap(e):
    return sum(sp.diff(e, xk, 2) for xk in X)

def div_rows(M):
    return sp.Matrix([sum(sp.diff(M[j, k], X[k]) for k in range(2)) for j in range(2)])

gu = grad_vec(u)
f = (sp.diff(u, t) + gu * u - mu * u.applyfunc(lap)
     + sp.Matrix([sp.diff(p, xk) for xk in X]) + lam * div_rows(F.T * F))
adv_F = sp.Matrix(2, 2, lambda i, k: sum(u[j] * sp.diff(F[i, k], X[j]) for j in range(2)))
g = sp.diff(F, t) + adv_F + F * gu - gam * F.applyfunc(lap)

def emit(name, exprs):
    syms, reduced = sp.cse([sp.expand_trig(e) for e in exprs], optimizations="basic")
    lines = [f"    const double {sp.ccode(s)} = {sp.ccode(e)};" for s, e in syms]
    lines += [f"    {name}[{i}] = {sp.ccode(e)};" for i, e in enumerate(reduced)]
    return "  {\n" + "\n".join(lines) + "\n  }"

src = f"""// Generated by tools/gen_mms.py; do not edit.
#include <cmath>

#include "elflow/scenario.hpp"

namespace elflow::mms {{

void exact(double x, double y, double t, double beta, double* u, double* F, double* p) {{
{emit("u", list(u))}
{emit("F", list(F))}
{emit("p", [p])}
}}

void forcing(double x, double y, double t, double beta, double mu, double lambda,
             double gamma, double* f, double* g) {{
{emit("f", list(f))}
{emit("g", list(g))}
}}

}}  // namespace elflow::mms
"""
out = pathlib.Path(__file__).resolve().parent.parent / "src" / "mms_forcing.cpp"
out.write_text(src.replace("M_PI", "kPi").replace("namespace elflow::mms {\n",
               "namespace elflow::mms {\n\nnamespace {\nconstexpr double kPi = 3.14159265358979323846;\n}\n", 1))
print("wrote", out)
