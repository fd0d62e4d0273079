"""Kernels of the four index transforms.

The central object is

    Phi_tau(x) = sqrt(pi) G(1/2+i tau-mu) G(1/2-i tau-mu)
                 * [P^mu_{-1/2+i tau}(sqrt((1+x)/x))]^2,

evaluated by three genuinely independent routes: the Legendre product above
(reference), a Mellin-Barnes vertical-line integral, and a Fourier-cosine
integral against a second-kind Legendre function. The inversion kernels - the
S kernel and the derivative-form kernel of the adjoint inversion - share the
Legendre-pair product P^mu (Q^{-mu}_{+i tau} + Q^{-mu}_{-i tau}).

The kernel satisfies a third-order ODE whose residual is computed with
derivatives taken analytically under the Mellin-Barnes integral: each d/dx
brings down a factor -s/x on the integrand, so no digits are lost to finite
differencing.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .complexfn import ln_gamma
from .config import EvalResult, QuadratureSpec
from .errors import BranchWarning, ContourError
from .quad import integrate_semi_infinite, integrate_vertical_line
from .specfun import _p, _q

_LN_SQRT_PI = 0.5 * math.log(math.pi)
_DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class TransformParams:
    """Order mu (Re mu < 1/2), contour abscissa nu, quadrature budget.

    nu must sit in the strip (-1/2, -Re mu) separating the two pole ladders
    of the Mellin-Barnes integrand.
    """

    mu: complex
    nu: float
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        mu = complex(self.mu)
        if not mu.real < 0.5:
            raise ValueError("requires Re mu < 1/2")
        if not (-0.5 < self.nu < -mu.real):
            raise ContourError(
                f"nu = {self.nu} outside the strip (-1/2, {-mu.real})")

    @classmethod
    def for_mu(cls, mu, quad: QuadratureSpec | None = None) -> "TransformParams":
        """Params with nu at the midpoint of the admissible strip."""
        mu = complex(mu)
        nu = 0.5 * (-0.5 - mu.real)
        return cls(mu=mu, nu=nu, quad=quad or QuadratureSpec())


@dataclass(frozen=True)
class KernelPoint:
    tau: float
    x: float

    def __post_init__(self):
        if not self.x > 0.0:
            raise ValueError("kernel point needs x > 0")


def kernel_argument(x: float) -> float:
    """The Legendre argument sqrt((1+x)/x) > 1 carried by every kernel."""
    return math.sqrt((1.0 + x) / x)


def _gamma_pair_ln(mu: complex, tau: float) -> complex:
    return ln_gamma(0.5 + 1j * tau - mu) + ln_gamma(0.5 - 1j * tau - mu)


def phi_direct(p: TransformParams, k: KernelPoint) -> complex:
    """Reference route: gamma pair times the squared Legendre function."""
    mu = complex(p.mu)
    X = kernel_argument(k.x)
    pv = _p(mu, -0.5 + 1j * k.tau, X)
    return cmath.exp(_LN_SQRT_PI + _gamma_pair_ln(mu, k.tau)) * pv * pv


def _mb_integrand(mu: complex, tau: float, x: float, deriv: int = 0):
    # gamma-product integrand of the vertical-line representation; each
    # derivative in x multiplies by (-s-j)/x under the integral
    lx = math.log(x)

    def F(s):
        ln = (ln_gamma(s + 0.5 + 1j * tau) + ln_gamma(s + 0.5 - 1j * tau)
              + ln_gamma(0.5 + s) + ln_gamma(-mu - s)
              - ln_gamma(1.0 + s) - ln_gamma(1.0 + s - mu)
              - (s + deriv) * lx)
        out = np.exp(ln)
        for j in range(deriv):
            out = out * (-s - j)
        return out

    return F


def phi_mellin_barnes(p: TransformParams, k: KernelPoint) -> EvalResult:
    """Vertical-line route at Re s = p.nu; validates against phi_direct."""
    mu = complex(p.mu)
    F = _mb_integrand(mu, k.tau, k.x)
    extra = abs(k.tau) + abs(mu.imag)
    r = integrate_vertical_line(F, p.nu, p.quad, extra_T=extra,
                                conjugate_symmetric=(mu.imag == 0.0))
    return EvalResult(value=r.value, err_estimate=r.err_estimate,
                      nodes_used=r.nodes_used,
                      truncation_T_used=r.truncation_T_used,
                      route="mellin-barnes")


def phi_fourier_cosine(p: TransformParams, k: KernelPoint) -> EvalResult:
    """Fourier-cosine route, stated for x >= 1 only."""
    if k.x < 1.0:
        raise ValueError("Fourier-cosine route is stated for x >= 1")
    return _phi_fc_unchecked(complex(p.mu), k.tau, k.x, p.quad)


def _phi_fc_unchecked(mu: complex, tau: float, x: float,
                      spec: QuadratureSpec) -> EvalResult:
    # 2 sqrt(x/pi) * int_0^inf cos(tau u) Q_{-1/2-mu}(2x cosh^2(u/2)+1) du;
    # the argument is >= 2x+1, always deep in the far zone of Q
    nu_q = -0.5 - mu

    def f(u):
        arg = 2.0 * x * math.cosh(0.5 * u) ** 2 + 1.0
        return math.cos(tau * u) * _q(0.0 + 0.0j, nu_q, arg)

    r = integrate_semi_infinite(f, spec, osc_freq=abs(tau))
    pre = 2.0 * math.sqrt(x / math.pi)
    return EvalResult(value=pre * r.value, err_estimate=pre * r.err_estimate,
                      nodes_used=r.nodes_used,
                      truncation_T_used=r.truncation_T_used,
                      route="fourier-cosine")


def kernel_derivative_mb(p: TransformParams, k: KernelPoint,
                         order: int) -> complex:
    """d^order/dx^order of Phi_tau(x), analytic under the MB integral."""
    if not 0 <= order <= 3:
        raise ValueError("derivative order must be 0..3")
    mu = complex(p.mu)
    F = _mb_integrand(mu, k.tau, k.x, deriv=order)
    extra = abs(k.tau) + abs(mu.imag)
    return integrate_vertical_line(F, p.nu, p.quad, extra_T=extra,
                                   conjugate_symmetric=(mu.imag == 0.0)).value


def ode_coefficients(mu: complex, tau: float, x: float) -> tuple:
    """Coefficients (c3, c2, c1, c0) of the third-order kernel ODE

        c3 Phi''' + c2 Phi'' + c1 Phi' + c0 Phi = 0.
    """
    mu = complex(mu)
    c3 = 2.0 * x ** 3 * (1.0 + x)
    c2 = 3.0 * x * x * (1.0 + 2.0 * x)
    c1 = x * (2.0 * x * (1.0 - mu * mu) + 2.0 * tau * tau + 0.5)
    c0 = -(0.25 + tau * tau)
    return c3, c2, c1, c0


def ode_residual(p: TransformParams, k: KernelPoint) -> float:
    """Relative residual of the kernel ODE, scale = max term magnitude."""
    derivs = [kernel_derivative_mb(p, k, n) for n in range(4)]
    c3, c2, c1, c0 = ode_coefficients(p.mu, k.tau, k.x)
    terms = [c3 * derivs[3], c2 * derivs[2], c1 * derivs[1], c0 * derivs[0]]
    scale = max(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(sum(terms)) / scale


def legendre_pair_product(mu: complex, tau: float, X: float) -> complex:
    """P^mu_{-1/2+i tau}(X) * (Q^{-mu}_{-1/2+i tau}(X) + Q^{-mu}_{-1/2-i tau}(X)).

    For real mu, degree conjugation gives Q_- = e^{-2 i mu pi} conj(Q_+)
    (the e^{i (order) pi} phase of Q does not conjugate), so only one Q is
    evaluated. Complex mu evaluates both.
    """
    mu = complex(mu)
    pv = _p(mu, -0.5 + 1j * tau, X)
    qp = _q(-mu, -0.5 + 1j * tau, X)
    if mu.imag == 0.0:
        phase = cmath.exp(-1j * math.pi * mu)
        qsum = phase * 2.0 * (qp / phase).real
    else:
        qsum = qp + _q(-mu, -0.5 - 1j * tau, X)
    return pv * qsum


def s_kernel(p: TransformParams, k: KernelPoint, *,
             route: str = "closed") -> complex:
    """Inversion kernel S_mu(x, tau).

    route="closed": sqrt(pi) e^{i mu pi} / (x^2 cosh(pi tau)) times the
    Legendre-pair product. route="contour": the defining vertical-line
    integral at abscissa gamma0 = 3/2 - nu, kept as an independent check.
    """
    mu = complex(p.mu)
    if mu.imag != 0.0:
        warnings.warn("s_kernel with non-real mu uses the principal branch "
                      "of exp(i pi mu)", BranchWarning)
    if route == "closed":
        X = kernel_argument(k.x)
        pre = math.sqrt(math.pi) * cmath.exp(1j * math.pi * mu) \
            / (k.x ** 2 * math.cosh(math.pi * k.tau))
        return pre * legendre_pair_product(mu, k.tau, X)
    if route == "contour":
        return _s_kernel_contour(p, k).value
    raise ValueError(f"unknown s_kernel route {route!r}")


def _s_kernel_contour(p: TransformParams, k: KernelPoint) -> EvalResult:
    # (1/2 pi i) int G(2-s) G(2-s-mu) G(s-3/2+i tau) G(s-3/2-i tau)
    #            / (G(s-1-mu) G(5/2-s)) x^{-s} ds  at  Re s = 3/2 - nu
    mu = complex(p.mu)
    tau, x = k.tau, k.x
    gamma0 = 1.5 - p.nu
    # the integrand is analytic for 3/2 < Re s < min(2, 2 - Re mu) and the
    # abscissa 3/2 - nu can graze the pole line Re s = 3/2; recentre when
    # the margin is thin, the value does not depend on the abscissa
    hi = 2.0 - max(0.0, mu.real)
    if gamma0 - 1.5 < 0.1 or hi - gamma0 < 0.05:
        gamma0 = 0.5 * (1.5 + hi)
    lx = math.log(x)

    def F(s):
        ln = (ln_gamma(2.0 - s) + ln_gamma(2.0 - s - mu)
              + ln_gamma(s - 1.5 + 1j * tau) + ln_gamma(s - 1.5 - 1j * tau)
              - ln_gamma(s - 1.0 - mu) - ln_gamma(2.5 - s) - s * lx)
        return np.exp(ln)

    extra = abs(tau) + abs(mu.imag)
    r = integrate_vertical_line(F, gamma0, p.quad, extra_T=extra,
                                conjugate_symmetric=(mu.imag == 0.0))
    return EvalResult(value=r.value, err_estimate=r.err_estimate,
                      nodes_used=r.nodes_used,
                      truncation_T_used=r.truncation_T_used,
                      route="s-contour")


def g_inverse_kernel(p: TransformParams, x_index: float, y: float) -> complex:
    """Derivative-form kernel of the adjoint inversion:

        (y^{-1/2} d/dy y^{-1/2}) [Legendre-pair product at sqrt((1+y)/y)].

    First derivative by central differences with Richardson extrapolation.
    The step is purely relative (h = 1e-5 y): the pair product varies on
    the scale of y itself, so an absolute floor would wreck the difference
    quotient for small y where this kernel matters most.
    """
    if y <= 0.0:
        raise ValueError("y must be positive")
    mu = complex(p.mu)

    def inner(t):
        return legendre_pair_product(mu, x_index, kernel_argument(t)) \
            / math.sqrt(t)

    h = 1e-5 * y
    d_h = (inner(y + h) - inner(y - h)) / (2.0 * h)
    d_h2 = (inner(y + 0.5 * h) - inner(y - 0.5 * h)) / h
    deriv = (4.0 * d_h2 - d_h) / 3.0
    return deriv / math.sqrt(y)


@lru_cache(maxsize=64)
def _norm_constant_cached(mu: complex, nu: float, T: float) -> float:
    def f(t):
        ln = (2.0 * ln_gamma(nu + 0.5 + 1j * t) + ln_gamma(-mu - nu - 1j * t)
              - ln_gamma(1.0 + nu + 1j * t - mu))
        return math.exp(ln.real)

    spec = QuadratureSpec(truncation_T=T)
    upper = integrate_semi_infinite(f, spec).value.real
    lower = integrate_semi_infinite(lambda t: f(-t), spec).value.real
    line = upper + lower
    lnb = (ln_gamma(nu + 0.5) * 2.0 - ln_gamma(2.0 * nu + 1.0)).real
    return (2.0 ** (2.0 * nu - 1.0) / (math.pi * math.sqrt(math.pi))
            * math.exp(lnb) * line)


def norm_constant(p: TransformParams) -> float:
    """The bound constant: (2^{2 nu - 1}/(pi sqrt(pi))) B(nu+1/2, nu+1/2)
    times the absolute gamma-ratio integral along Re s = nu."""
    mu = complex(p.mu)
    return _norm_constant_cached(mu, p.nu, p.quad.truncation_T + abs(mu.imag))
