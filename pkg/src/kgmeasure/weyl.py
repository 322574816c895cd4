"""Weyl algebra over lattice test functions and Gaussian state functionals.

Every smeared field is reduced to Cauchy data of its commutator-function
solution, stored on the two bottom time slices ``(u[0], u[1])`` of the grid.
For two such data vectors the staggered pairing

    pair(d, d') = (dx/dt) * sum_x (u0 * v1 - u1 * v0)

is exactly conserved by the leapfrog update, and equals the commutator form
E(f, g) of the underlying test functions.  All state manipulations in the
package (Weyl products, symplectic scattering, effect-conditioned updates)
act on finite combinations of displaced Gaussians in these coordinates, so
the calculus below is closed and free of truncation error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import SectorError, SolverError
from .fields import FieldParams, TestFunction, pauli_jordan
from .lattice import PERIODIC

_KEY_DECIMALS = 12


def _data_key(data: np.ndarray) -> bytes:
    rounded = np.round(data, _KEY_DECIMALS)
    rounded += 0.0  # fold -0.0 into +0.0 so keys are sign-stable
    return rounded.tobytes()


@dataclass(frozen=True)
class PhaseSpace:
    """Cauchy-data phase space of a single scalar field."""

    params: FieldParams
    name: str = field(default="system", compare=False)

    @property
    def n_x(self) -> int:
        return self.params.spec.n_x

    @property
    def dim(self) -> int:
        return 2 * self.params.spec.n_x

    @property
    def sectors(self):
        return (self,)

    def pairing(self, d1: np.ndarray, d2: np.ndarray) -> float:
        n = self.n_x
        c = self.params.spec.dx / self.params.spec.dt
        return float(c * (d1[:n] @ d2[n:] - d1[n:] @ d2[:n]))

    def omega_matrix(self) -> np.ndarray:
        n = self.n_x
        c = self.params.spec.dx / self.params.spec.dt
        omega = np.zeros((2 * n, 2 * n))
        omega[:n, n:] = c * np.eye(n)
        omega[n:, :n] = -c * np.eye(n)
        return omega

    def data_of(self, f: TestFunction) -> np.ndarray:
        """Bottom-slice Cauchy data of the commutator-function solution of f."""
        ef = pauli_jordan(f, self.params)
        return np.concatenate([ef[0], ef[1]])

    def solution_from_data(self, data: np.ndarray) -> np.ndarray:
        """Free leapfrog evolution of the data over the whole grid."""
        from .scattering import free_solution  # local import to avoid a cycle

        return free_solution(data, self.params)

    def split(self, data: np.ndarray):
        return (data,)

    def block_slices(self):
        return (slice(0, self.dim),)


@dataclass(frozen=True)
class CompositeSpace:
    """Direct sum of phase spaces (system plus one probe per extra sector)."""

    parts: tuple[PhaseSpace, ...]

    @property
    def dim(self) -> int:
        return sum(p.dim for p in self.parts)

    @property
    def sectors(self):
        return self.parts

    def block_slices(self):
        out, start = [], 0
        for p in self.parts:
            out.append(slice(start, start + p.dim))
            start += p.dim
        return tuple(out)

    def split(self, data: np.ndarray):
        return tuple(data[s] for s in self.block_slices())

    def embed(self, index: int, data: np.ndarray) -> np.ndarray:
        full = np.zeros(self.dim)
        full[self.block_slices()[index]] = data
        return full

    def combine(self, blocks) -> np.ndarray:
        return np.concatenate([np.asarray(b, dtype=float) for b in blocks])

    def pairing(self, d1: np.ndarray, d2: np.ndarray) -> float:
        return sum(
            p.pairing(a, b) for p, a, b in zip(self.parts, self.split(d1), self.split(d2))
        )

    def omega_matrix(self) -> np.ndarray:
        omega = np.zeros((self.dim, self.dim))
        for p, s in zip(self.parts, self.block_slices()):
            omega[s, s] = p.omega_matrix()
        return omega


def _same_space(a, b) -> None:
    if a != b:
        raise SectorError(f"phase-space mismatch: {a} vs {b}")


@dataclass(frozen=True)
class WeylGenerator:
    """Exponentiated smeared field, labelled by its phase-space data."""

    space: object
    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.shape != (self.space.dim,):
            raise SectorError(f"data length {d.shape} does not fit space dim {self.space.dim}")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @classmethod
    def from_function(cls, space: PhaseSpace, f: TestFunction) -> "WeylGenerator":
        return cls(space, space.data_of(f))


class AlgebraElement:
    """Finite complex combination of Weyl generators over one phase space."""

    def __init__(self, space, terms=None):
        self.space = space
        self.terms: dict[bytes, tuple[complex, np.ndarray]] = {}
        for coeff, data in terms or []:
            self._add_term(complex(coeff), np.asarray(data, dtype=float))

    def _add_term(self, coeff: complex, data: np.ndarray) -> None:
        key = _data_key(data)
        if key in self.terms:
            old_c, old_d = self.terms[key]
            coeff = coeff + old_c
            data = old_d
        if coeff == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = (coeff, data)

    @classmethod
    def unit(cls, space) -> "AlgebraElement":
        return cls(space, [(1.0, np.zeros(space.dim))])

    @classmethod
    def weyl(cls, space, data_or_function, coeff=1.0) -> "AlgebraElement":
        if isinstance(data_or_function, TestFunction):
            data = space.data_of(data_or_function)
        else:
            data = np.asarray(data_or_function, dtype=float)
        return cls(space, [(coeff, data)])

    def __len__(self) -> int:
        return len(self.terms)

    def items(self):
        """Deterministically ordered (coeff, data) pairs."""
        return [self.terms[k] for k in sorted(self.terms)]

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _same_space(self.space, other.space)
        out = AlgebraElement(self.space, self.items())
        for coeff, data in other.items():
            out._add_term(coeff, data)
        return out

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-1.0) * other

    def __rmul__(self, c) -> "AlgebraElement":
        return AlgebraElement(self.space, [(c * coeff, data) for coeff, data in self.items()])

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return weyl_multiply(self, other)


def weyl_multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Bilinear product using W(f) W(g) = exp(-i E(f,g)/2) W(f+g)."""
    _same_space(a.space, b.space)
    out = AlgebraElement(a.space)
    for ca, da in a.items():
        for cb, db in b.items():
            phase = np.exp(-0.5j * a.space.pairing(da, db))
            out._add_term(ca * cb * phase, da + db)
    return out


def adjoint(a: AlgebraElement) -> AlgebraElement:
    """W(f)* = W(-f) with conjugated coefficients."""
    return AlgebraElement(a.space, [(np.conj(c), -d) for c, d in a.items()])


def is_selfadjoint(a: AlgebraElement, tol: float = 1e-10) -> bool:
    diff = a - adjoint(a)
    return all(abs(c) <= tol for c, _ in diff.items())


@dataclass(frozen=True)
class QuasiFreeState:
    """Gaussian state: chi(f) = exp(i mean.d - d.G.d / 2) on data vectors d."""

    space: object
    covariance: np.ndarray
    mean: np.ndarray = None

    def __post_init__(self):
        g = np.asarray(self.covariance, dtype=float)
        if g.shape != (self.space.dim, self.space.dim):
            raise SectorError("covariance shape does not match phase space")
        mean = self.mean
        if mean is None:
            mean = np.zeros(self.space.dim)
        mean = np.asarray(mean, dtype=float)
        object.__setattr__(self, "covariance", g)
        object.__setattr__(self, "mean", mean)

    def char_value(self, data: np.ndarray) -> complex:
        return np.exp(1j * (self.mean @ data) - 0.5 * (data @ self.covariance @ data))

    def as_functional(self) -> "StateFunctional":
        return StateFunctional(
            self.space, self.covariance, [(1.0 + 0j, 1j * self.mean.astype(complex))]
        )


class StateFunctional:
    """Finite displaced-Gaussian combination over a base covariance.

    Each component is a complex weight together with a complex linear
    coefficient vector; the functional value on a Weyl generator with data d is

        sum_j w_j * exp(lin_j . d - d . G . d / 2).

    The imaginary part of ``lin`` carries means and Weyl phases, the real part
    carries displacements of the Gaussian.  The class is closed under all
    update operations performed by the package.
    """

    def __init__(self, space, covariance, components):
        self.space = space
        self.covariance = np.asarray(covariance, dtype=float)
        if self.covariance.shape != (space.dim, space.dim):
            raise SectorError("covariance shape does not match phase space")
        self.components = [
            (complex(w), np.asarray(lin, dtype=complex)) for w, lin in components
        ]
        for _, lin in self.components:
            if lin.shape != (space.dim,):
                raise SectorError("component linear term does not fit phase space")

    @property
    def norm(self) -> float:
        total = sum(w for w, _ in self.components)
        return float(np.real(total))

    def char_value(self, data: np.ndarray) -> complex:
        data = np.asarray(data, dtype=float)
        quad = 0.5 * (data @ self.covariance @ data)
        return sum(w * np.exp(lin @ data - quad) for w, lin in self.components)

    def normalized(self) -> "StateFunctional":
        n = sum(w for w, _ in self.components)
        if abs(n) <= 1e-12:
            from .errors import ConditioningError

            raise ConditioningError("cannot normalize a null functional")
        return StateFunctional(
            self.space, self.covariance, [(w / n, lin) for w, lin in self.components]
        )

    def displaced(self, data: np.ndarray) -> "StateFunctional":
        """Conjugated state A -> s(W(d)* A W(d))."""
        omega = self.space.omega_matrix()
        shift = 1j * (omega.T @ np.asarray(data, dtype=float))
        return StateFunctional(
            self.space, self.covariance, [(w, lin + shift) for w, lin in self.components]
        )

    def to_record(self) -> str:
        """Structured-text serialization for golden-file comparisons."""
        doc = {
            "dim": self.space.dim,
            "covariance": [[repr(v) for v in row] for row in self.covariance.tolist()],
            "components": [
                {
                    "weight": [repr(w.real), repr(w.imag)],
                    "lin_re": [repr(v) for v in lin.real.tolist()],
                    "lin_im": [repr(v) for v in lin.imag.tolist()],
                }
                for w, lin in self.components
            ],
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_record(cls, space, text: str) -> "StateFunctional":
        doc = json.loads(text)
        if doc["dim"] != space.dim:
            raise SectorError("serialized record does not match phase space")
        cov = np.array([[float(v) for v in row] for row in doc["covariance"]])
        comps = []
        for c in doc["components"]:
            w = complex(float(c["weight"][0]), float(c["weight"][1]))
            lin = np.array([float(v) for v in c["lin_re"]]) + 1j * np.array(
                [float(v) for v in c["lin_im"]]
            )
            comps.append((w, lin))
        return cls(space, cov, comps)


def _as_functional(state) -> StateFunctional:
    if isinstance(state, QuasiFreeState):
        return state.as_functional()
    if isinstance(state, StateFunctional):
        return state
    raise SectorError(f"not a state: {state!r}")


def evaluate(state, a: AlgebraElement) -> complex:
    """Expectation value of an algebra element, linear in the element."""
    s = _as_functional(state)
    _same_space(s.space, a.space)
    return complex(sum(c * s.char_value(d) for c, d in a.items()))


def gram_matrix(state, datas) -> np.ndarray:
    """Matrix omega(W(d_i)* W(d_j)); positive semidefinite for genuine states."""
    s = _as_functional(state)
    n = len(datas)
    m = np.zeros((n, n), dtype=complex)
    for i, di in enumerate(datas):
        for j, dj in enumerate(datas):
            phase = np.exp(0.5j * s.space.pairing(di, dj))
            m[i, j] = phase * s.char_value(dj - di)
    return m


def gram_min_eigenvalue(state, datas) -> float:
    m = gram_matrix(state, datas)
    return float(np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))))


def _poly_mul(p: dict, q: dict, max_order: int) -> dict:
    out: dict[tuple, complex] = {}
    for ea, ca in p.items():
        for eb, cb in q.items():
            exp = tuple(x + y for x, y in zip(ea, eb))
            if sum(exp) > max_order:
                continue
            out[exp] = out.get(exp, 0.0) + ca * cb
    return out


def field_moment(state, hs) -> complex:
    """Weyl-symmetrized moment < phi(h_1) ... phi(h_k) > for k <= 4.

    Computed as an analytic derivative of the characteristic functional (no
    finite differences).  Repeat a function to obtain powers; for a single
    repeated function the symmetrized and ordinary moments coincide.
    """
    s = _as_functional(state)
    k = len(hs)
    if k == 0:
        return complex(s.norm)
    if k > 4:
        raise SolverError("field moments are supported up to order 4")
    datas = []
    for h in hs:
        if isinstance(h, TestFunction):
            datas.append(s.space.data_of(h))
        else:
            datas.append(np.asarray(h, dtype=float))
    g = s.covariance
    cross = np.array([[di @ g @ dj for dj in datas] for di in datas])
    total = 0.0 + 0j
    target = tuple([1] * k)
    for w, lin in s.components:
        # exponent polynomial p(t) = sum_i a_i t_i + sum_{ij} q_ij t_i t_j
        p: dict[tuple, complex] = {}
        for i, di in enumerate(datas):
            e = [0] * k
            e[i] = 1
            p[tuple(e)] = p.get(tuple(e), 0.0) + (lin @ di)
        for i in range(k):
            for j in range(i, k):
                e = [0] * k
                e[i] += 1
                e[j] += 1
                coeff = -0.5 * cross[i, j] if i == j else -cross[i, j]
                p[tuple(e)] = p.get(tuple(e), 0.0) + coeff
        # Taylor-expand exp(p) up to total order k and read off t_1 ... t_k
        expansion = {tuple([0] * k): 1.0 + 0j}
        power = {tuple([0] * k): 1.0 + 0j}
        factorial = 1.0
        for n in range(1, k + 1):
            power = _poly_mul(power, p, k)
            factorial *= n
            for e, c in power.items():
                expansion[e] = expansion.get(e, 0.0) + c / factorial
        total += w * expansion.get(target, 0.0)
    return complex((-1j) ** k * total)


def dispersion_relation(params: FieldParams) -> np.ndarray:
    """Mode frequencies sqrt(m^2 + (2 - 2 cos(k dx)) / dx^2) of the stencil."""
    spec = params.spec
    k = 2.0 * np.pi * np.arange(spec.n_x) / spec.n_x
    return np.sqrt(params.mass**2 + (2.0 - 2.0 * np.cos(k)) / spec.dx**2)


def _circulant(first_row_kernel: np.ndarray) -> np.ndarray:
    n = len(first_row_kernel)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return first_row_kernel[idx]


def vacuum_state(params: FieldParams, space: PhaseSpace | None = None) -> QuasiFreeState:
    """Ground-state quasi-free state of the spatial discretization.

    The covariance is the lattice mode sum with the stencil dispersion; the
    resulting Gaussian saturates the uncertainty bound mode by mode, so the
    state is positive on the Weyl algebra of the staggered data pairing.
    """
    if params.mass <= 0:
        raise SolverError("massless vacuum is infrared-divergent in 1+1D")
    if params.spec.boundary != PERIODIC:
        raise SolverError("vacuum construction requires the periodic boundary")
    if space is None:
        space = PhaseSpace(params)
    spec = params.spec
    n = spec.n_x
    omega_k = dispersion_relation(params)
    a_kernel = np.real(np.fft.ifft(omega_k / 2.0))
    b_kernel = np.real(np.fft.ifft(1.0 / (2.0 * omega_k)))
    a = spec.dx * _circulant(a_kernel)  # quadratic form on the field component
    b = spec.dx * _circulant(b_kernel)  # quadratic form on the momentum component
    # staggered data -> (field, momentum): phi = (u0+u1)/2, pi = (u1-u0)/dt
    m = np.zeros((2 * n, 2 * n))
    m[:n, :n] = 0.5 * np.eye(n)
    m[:n, n:] = 0.5 * np.eye(n)
    m[n:, :n] = -np.eye(n) / spec.dt
    m[n:, n:] = np.eye(n) / spec.dt
    blocks = np.zeros((2 * n, 2 * n))
    blocks[:n, :n] = a
    blocks[n:, n:] = b
    g = m.T @ blocks @ m
    g = 0.5 * (g + g.T)
    return QuasiFreeState(space, g)


def product_state(space: CompositeSpace, states) -> StateFunctional:
    """Tensor product of per-sector states on a composite space."""
    funcs = [_as_functional(s) for s in states]
    if len(funcs) != len(space.parts):
        raise SectorError("need one state per sector")
    for f, p in zip(funcs, space.parts):
        _same_space(f.space, p)
    cov = np.zeros((space.dim, space.dim))
    for f, sl in zip(funcs, space.block_slices()):
        cov[sl, sl] = f.covariance
    components = [(1.0 + 0j, np.zeros(space.dim, dtype=complex))]
    for f, sl in zip(funcs, space.block_slices()):
        new = []
        for w0, lin0 in components:
            for w, lin in f.components:
                lin_full = lin0.copy()
                lin_full[sl] += lin
                new.append((w0 * w, lin_full))
        components = new
    return StateFunctional(space, cov, components)
