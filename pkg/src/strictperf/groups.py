"""Finite-level models of the acting groups and their group algebras.

Case A is a finite abelian group: truncations of Z_p-factors times a finite
abelian p-group Q times a p'-group Q'.  Case B is the metabelian shape
coming from tame fundamental groups: generators w2_1..w2_r of p-power order
and a finite abelian part, extended by a cyclic group generated by Phi
acting on each w2_j by the exponent ell^f.  At truncation level m the
congruence ell^(f*d*p^m') = 1 mod p^(s_j+m) must hold so the conjugation
action is well defined on the quotient.

Elements are exponent tuples with a normalization routine that pushes
Phi-powers to the right using the conjugation relation.  Row-vector
convention: for a left module action, coords(g.x) = coords(x) @ act(g).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import Modulus
from .rings import ArtinianRing


def _mult_order(a: int, n: int) -> int:
    """Multiplicative order of a modulo n (a assumed coprime to n)."""
    if n == 1:
        return 1
    k, x = 1, a % n
    while x != 1:
        x = (x * a) % n
        k += 1
        if k > n:
            raise ValueError("not a unit")
    return k


@dataclass
class GroupModel:
    """Presentation data for the finite-level group.

    Case A fields: ``w1_orders`` (p-power truncations of the Z_p factors),
    ``q_orders`` (finite abelian p-part) and ``qprime_orders`` (p'-part).

    Case B fields: ``p, ell, f, d, r, s, level`` plus ``tilde1_orders`` for
    the finite abelian part of order prime to p and ell; ``phi_level`` is
    the w1-truncation exponent m' and may be supplied or derived minimal.
    """

    case: str
    p: int
    w1_orders: tuple = ()
    q_orders: tuple = ()
    qprime_orders: tuple = ()
    ell: int = 0
    f: int = 1
    d: int = 1
    r: int = 1
    s: tuple = ()
    level: int = 1
    tilde1_orders: tuple = ()
    phi_level: int | None = None

    def __post_init__(self):
        if self.case == "A":
            self.gen_names = (
                [f"w1_{j+1}" for j in range(len(self.w1_orders))]
                + [f"q_{j+1}" for j in range(len(self.q_orders))]
                + [f"qp_{j+1}" for j in range(len(self.qprime_orders))]
            )
            self.gen_orders = list(self.w1_orders) + list(self.q_orders) + list(self.qprime_orders)
            for o in self.w1_orders + self.q_orders:
                if o < 1 or (o > 1 and o % self.p != 0):
                    raise ValueError("p-part orders must be p-powers")
            for o in self.qprime_orders:
                if o % self.p == 0:
                    raise ValueError("Q' must have order prime to p")
        elif self.case == "B":
            if not self.s:
                self.s = tuple([1] * self.r)
            if len(self.s) != self.r:
                raise ValueError("need one s_j per w2 generator")
            if self.ell % self.p == 0 or self.ell < 2:
                raise ValueError("ell must be a prime different from p")
            for o in self.tilde1_orders:
                if o % self.p == 0 or o % self.ell == 0:
                    raise ValueError("tilde-Delta_1 must have order prime to p and ell")
            self.w2_orders = [self.p ** (sj + self.level) for sj in self.s]
            if self.phi_level is None:
                self.phi_level = self._minimal_phi_level()
            self._check_congruence()
            phi_order = self.d * self.p**self.phi_level
            self.gen_names = (
                [f"w2_{j+1}" for j in range(self.r)]
                + [f"xi_{j+1}" for j in range(len(self.tilde1_orders))]
                + ["phi"]
            )
            self.gen_orders = list(self.w2_orders) + list(self.tilde1_orders) + [phi_order]
        else:
            raise ValueError("case must be 'A' or 'B'")
        self.n_gens = len(self.gen_names)

    # -- Case B structure ---------------------------------------------------

    def _minimal_phi_level(self) -> int:
        mp = 0
        while True:
            ok = all(
                o == 1 or pow(self.ell, self.f * self.d * self.p**mp, o) == 1
                for o in self.w2_orders
            )
            if ok:
                return mp
            mp += 1
            if mp > 40:
                raise ValueError("no admissible phi level")

    def _check_congruence(self):
        for o in self.w2_orders:
            if o > 1 and pow(self.ell, self.f * self.d * self.p**self.phi_level, o) != 1:
                raise ValueError(
                    "level violates ell^(f d p^m') = 1 mod p^(s_j+level)"
                )

    def conj_exponent(self, t: int, w2_index: int) -> int:
        """Exponent of the action of phi^t on w2_j: ell^(f t)."""
        return pow(self.ell, self.f * t, self.w2_orders[w2_index])

    # -- element arithmetic --------------------------------------------------

    def identity(self):
        return tuple([0] * self.n_gens)

    def mul(self, a, b):
        if self.case == "A":
            return tuple((x + y) % o for x, y, o in zip(a, b, self.gen_orders))
        # (b, xi, t) * (b', xi', t') = (b + ell^(f t) b', xi + xi', t + t')
        t = a[-1]
        out = []
        for j in range(self.r):
            e = self.conj_exponent(t, j)
            out.append((a[j] + e * b[j]) % self.w2_orders[j])
        for j in range(len(self.tilde1_orders)):
            out.append((a[self.r + j] + b[self.r + j]) % self.tilde1_orders[j])
        out.append((a[-1] + b[-1]) % self.gen_orders[-1])
        return tuple(out)

    def inv(self, a):
        if self.case == "A":
            return tuple((-x) % o for x, o in zip(a, self.gen_orders))
        t = a[-1]
        tinv = (-t) % self.gen_orders[-1]
        out = []
        for j in range(self.r):
            e = self.conj_exponent(tinv, j)
            out.append((-e * a[j]) % self.w2_orders[j])
        for j in range(len(self.tilde1_orders)):
            out.append((-a[self.r + j]) % self.tilde1_orders[j])
        out.append(tinv)
        return tuple(out)

    def generator(self, name: str):
        e = [0] * self.n_gens
        e[self.gen_names.index(name)] = 1
        return tuple(e)

    def power(self, a, k: int):
        out = self.identity()
        k = k % self.order_of(a) if k < 0 else k
        for _ in range(k):
            out = self.mul(out, a)
        return out

    def order_of(self, a) -> int:
        k, x = 1, a
        while x != self.identity():
            x = self.mul(x, a)
            k += 1
        return k

    def elements(self):
        ranges = [range(o) for o in self.gen_orders]
        return [tuple(t) for t in itertools.product(*ranges)]

    @property
    def order(self) -> int:
        out = 1
        for o in self.gen_orders:
            out *= o
        return out

    # Distinguished elements of the Case B shape.
    def w1(self):
        return self.power(self.generator("phi"), self.d)

    def sigma(self):
        return self.power(self.generator("phi"), self.p**self.phi_level)

    def w2(self, j=0):
        return self.generator(f"w2_{j+1}")

    def verify_relations(self) -> bool:
        """Spot-check the presentation on all generator pairs."""
        for name, o in zip(self.gen_names, self.gen_orders):
            g = self.generator(name)
            if self.power(g, o) != self.identity():
                return False
            if o > 1 and self.order_of(g) != o:
                return False
        if self.case == "A":
            for n1 in self.gen_names:
                for n2 in self.gen_names:
                    a, b = self.generator(n1), self.generator(n2)
                    if self.mul(a, b) != self.mul(b, a):
                        return False
            return True
        phi = self.generator("phi")
        for j in range(self.r):
            w2 = self.w2(j)
            lhs = self.mul(self.mul(phi, w2), self.inv(phi))
            if lhs != self.power(w2, pow(self.ell, self.f, self.w2_orders[j])):
                return False
        w1 = self.w1()
        for j in range(self.r):
            w2 = self.w2(j)
            lhs = self.mul(self.mul(w1, w2), self.inv(w1))
            if lhs != self.power(w2, pow(self.ell, self.f * self.d, self.w2_orders[j])):
                return False
        # The w2/xi block is abelian; sigma and w1 commute.
        for n1 in self.gen_names[:-1]:
            for n2 in self.gen_names[:-1]:
                a, b = self.generator(n1), self.generator(n2)
                if self.mul(a, b) != self.mul(b, a):
                    return False
        if self.mul(self.sigma(), self.w1()) != self.mul(self.w1(), self.sigma()):
            return False
        return True

    def at_level(self, level: int) -> "GroupModel":
        """The same model truncated at another level."""
        if self.case == "A":
            # Deeper truncation multiplies each Z_p-factor order by p.
            shift = level - self.level if hasattr(self, "level") else 0
            new_orders = tuple(o * self.p ** (level - self.level) for o in self.w1_orders)
            g = GroupModel(
                "A",
                self.p,
                w1_orders=new_orders,
                q_orders=self.q_orders,
                qprime_orders=self.qprime_orders,
            )
            g.level = level
            return g
        return GroupModel(
            "B",
            self.p,
            ell=self.ell,
            f=self.f,
            d=self.d,
            r=self.r,
            s=self.s,
            level=level,
            tilde1_orders=self.tilde1_orders,
        )

    @staticmethod
    def gamma_z2_x_z2(level: int) -> "GroupModel":
        """Z_2 x Z/2 truncated at w1-order 2^level (the section-4 group)."""
        g = GroupModel("A", 2, w1_orders=(2**level,), q_orders=(2,))
        g.level = level
        return g

    # -- JSON ---------------------------------------------------------------

    def to_json(self) -> dict:
        if self.case == "A":
            return {
                "case": "A",
                "p": self.p,
                "w1Orders": list(self.w1_orders),
                "Q": list(self.q_orders),
                "Qprime": list(self.qprime_orders),
            }
        return {
            "case": "B",
            "p": self.p,
            "ell": self.ell,
            "f": self.f,
            "d": self.d,
            "r": self.r,
            "s": list(self.s),
            "level": self.level,
            "tildeDelta1": list(self.tilde1_orders),
        }

    @staticmethod
    def from_json(data: dict) -> "GroupModel":
        if data["case"] == "A":
            g = GroupModel(
                "A",
                data["p"],
                w1_orders=tuple(data.get("w1Orders", [])),
                q_orders=tuple(data.get("Q", [])),
                qprime_orders=tuple(data.get("Qprime", [])),
            )
            g.level = data.get("level", 1)
            return g
        return GroupModel(
            "B",
            data["p"],
            ell=data["ell"],
            f=data.get("f", 1),
            d=data.get("d", 1),
            r=data.get("r", 1),
            s=tuple(data.get("s", [])),
            level=data.get("level", 1),
            tilde1_orders=tuple(data.get("tildeDelta1", [])),
        )


class GroupAlgebra:
    """B = A[G] for a finite-level group model G.

    Coordinates are group-element-major blocks of the coefficient ring's
    coordinates; all matrices follow the row-vector convention.
    """

    def __init__(self, ring: ArtinianRing, group: GroupModel):
        self.ring = ring
        self.group = group
        self.elements = group.elements()
        self.index = {g: i for i, g in enumerate(self.elements)}
        self.n_group = len(self.elements)
        self.nA = ring.n
        self.dim = self.n_group * self.nA
        self.mod = ring.mod

    # -- coordinates ---------------------------------------------------------

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=np.int64)

    def unit_vector(self, g=None) -> np.ndarray:
        v = self.zero()
        gi = self.index[g if g is not None else self.group.identity()]
        v[gi * self.nA : (gi + 1) * self.nA] = self.ring.one_coords()
        return v

    def element_vector(self, terms) -> np.ndarray:
        """Build a vector from (group element, integer coefficient) pairs."""
        v = self.zero()
        for g, c in terms:
            gi = self.index[g]
            v[gi * self.nA : (gi + 1) * self.nA] = (
                v[gi * self.nA : (gi + 1) * self.nA] + c * self.ring.one_coords()
            ) % self.mod.q
        return v

    def mul(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64).reshape(self.n_group, self.nA)
        y = np.asarray(y, dtype=np.int64).reshape(self.n_group, self.nA)
        out = np.zeros((self.n_group, self.nA), dtype=np.int64)
        for gi in range(self.n_group):
            if not x[gi].any():
                continue
            for hi in range(self.n_group):
                if not y[hi].any():
                    continue
                ki = self.index[self.group.mul(self.elements[gi], self.elements[hi])]
                out[ki] = (out[ki] + self.ring.mul_coords(x[gi], y[hi])) % self.mod.q
        return out.reshape(-1)

    def power(self, x, k: int) -> np.ndarray:
        out = self.unit_vector()
        for _ in range(k):
            out = self.mul(out, x)
        return out

    def left_regular_action(self, g) -> np.ndarray:
        """Matrix of x -> g*x (used as the generator action on B itself)."""
        out = np.zeros((self.dim, self.dim), dtype=np.int64)
        for hi, h in enumerate(self.elements):
            ki = self.index[self.group.mul(g, h)]
            out[hi * self.nA : (hi + 1) * self.nA, ki * self.nA : (ki + 1) * self.nA] = np.eye(
                self.nA, dtype=np.int64
            )
        return out

    def right_mult_matrix(self, x) -> np.ndarray:
        """Matrix of y -> y*x; its rows span the left ideal B*x."""
        x = np.asarray(x, dtype=np.int64).reshape(self.n_group, self.nA)
        out = np.zeros((self.dim, self.dim), dtype=np.int64)
        for hi in range(self.n_group):
            if not x[hi].any():
                continue
            mult = self.ring.mult_matrix(x[hi])  # b_i * x_h coefficient block
            for gi, g in enumerate(self.elements):
                ki = self.index[self.group.mul(g, self.elements[hi])]
                out[gi * self.nA : (gi + 1) * self.nA, ki * self.nA : (ki + 1) * self.nA] = (
                    out[gi * self.nA : (gi + 1) * self.nA, ki * self.nA : (ki + 1) * self.nA]
                    + mult
                ) % self.mod.q
        return out

    def left_mult_matrix(self, x) -> np.ndarray:
        """Matrix of y -> x*y; its rows span the right ideal x*B."""
        x = np.asarray(x, dtype=np.int64).reshape(self.n_group, self.nA)
        out = np.zeros((self.dim, self.dim), dtype=np.int64)
        for hi in range(self.n_group):
            if not x[hi].any():
                continue
            mult = self.ring.mult_matrix(x[hi])
            for gi, g in enumerate(self.elements):
                ki = self.index[self.group.mul(self.elements[hi], g)]
                out[gi * self.nA : (gi + 1) * self.nA, ki * self.nA : (ki + 1) * self.nA] = (
                    out[gi * self.nA : (gi + 1) * self.nA, ki * self.nA : (ki + 1) * self.nA]
                    + mult
                ) % self.mod.q
        return out

    def left_ideal_span(self, x) -> linalg.HowellForm:
        return linalg.howell(self.right_mult_matrix(x), self.mod)

    def right_ideal_span(self, x) -> linalg.HowellForm:
        return linalg.howell(self.left_mult_matrix(x), self.mod)

    def augmentation(self, x) -> np.ndarray:
        """Ring map B -> A summing coefficients over the group."""
        x = np.asarray(x, dtype=np.int64).reshape(self.n_group, self.nA)
        return self.ring.reduce(x.sum(axis=0) % self.mod.q)

    def binomial_element(self, g, subtract_one_power: int, base_power: int = 1):
        """(g^base)^... helper: returns (g^base - 1)^subtract_one_power."""
        base = self.group.power(g, base_power)
        gm1 = (self.element_vector([(base, 1)]) - self.unit_vector()) % self.mod.q
        return self.power(gm1, subtract_one_power)


class NormalFormBasis:
    """The finite-level power-series basis for a Case B group algebra.

    Labels are tuples (u, a, xi, b_1..b_r, c_1..c_r) realizing
    sigma^u (w1-1)^a xi prod_j w2_j^(b_j) (w2_j^(p^s_j)-1)^(c_j); the change
    of basis to the group-element basis is unitriangular, hence invertible
    over any coefficient ring.
    """

    def __init__(self, algebra: GroupAlgebra):
        group = algebra.group
        if group.case != "B":
            raise ValueError("normal form requires a Case B model")
        self.algebra = algebra
        g = group
        p = g.p
        self.ranges = (
            [g.d, p**g.phi_level]
            + list(g.tilde1_orders)
            + [p**sj for sj in g.s]
            + [p**g.level for _ in g.s]
        )
        self.labels = list(itertools.product(*[range(n) for n in self.ranges]))
        if len(self.labels) != g.order:
            raise AssertionError("label count must match the group order")
        # The label elements have integer coefficients, so the change of
        # basis lives at group level and extends to any coefficient ring.
        q = algebra.mod.q
        n = algebra.n_group

        def gmul(a, b):
            out = np.zeros(n, dtype=np.int64)
            for gi in np.nonzero(a)[0]:
                for hi in np.nonzero(b)[0]:
                    ki = algebra.index[g.mul(algebra.elements[gi], algebra.elements[hi])]
                    out[ki] = (out[ki] + a[gi] * b[hi]) % q
            return out

        def gelem(el, c=1):
            v = np.zeros(n, dtype=np.int64)
            v[algebra.index[el]] = c % q
            return v

        def gbinom(base_el, power):
            gm1 = (gelem(base_el) - gelem(g.identity())) % q
            out = gelem(g.identity())
            for _ in range(power):
                out = gmul(out, gm1)
            return out

        rows = []
        sigma = g.sigma()
        w1 = g.w1()
        nt = len(g.tilde1_orders)
        for lab in self.labels:
            u, a = lab[0], lab[1]
            xi_part = lab[2 : 2 + nt]
            bs = lab[2 + nt : 2 + nt + g.r]
            cs = lab[2 + nt + g.r :]
            vec = gelem(g.power(sigma, u))
            vec = gmul(vec, gbinom(w1, a))
            xi = tuple([0] * g.r + list(xi_part) + [0])
            vec = gmul(vec, gelem(xi))
            for j in range(g.r):
                if bs[j]:
                    vec = gmul(vec, gelem(g.power(g.w2(j), bs[j])))
                if cs[j]:
                    vec = gmul(vec, gbinom(g.power(g.w2(j), p ** g.s[j]), cs[j]))
            rows.append(vec)
        self.matrix = np.vstack(rows) % q
        self.inverse = linalg.inverse(self.matrix, algebra.mod)
        if self.inverse is None:
            raise AssertionError("normal-form change of basis is not invertible")

    def to_normal_form(self, x) -> np.ndarray:
        """Label-basis coordinates (blocks of ring coordinates per label)."""
        alg = self.algebra
        x = np.asarray(x, dtype=np.int64).reshape(alg.n_group, alg.nA)
        out = (self.inverse.T @ x) % alg.mod.q
        return out.reshape(-1)

    def from_normal_form(self, coords) -> np.ndarray:
        alg = self.algebra
        z = np.asarray(coords, dtype=np.int64).reshape(alg.n_group, alg.nA)
        out = (self.matrix.T @ z) % alg.mod.q
        return out.reshape(-1)

    def c_degree(self, label) -> int:
        g = self.algebra.group
        nt = len(g.tilde1_orders)
        return max(label[2 + nt + g.r :]) if g.r else 0


@dataclass(frozen=True)
class CommuteCertificate:
    n: int
    n_prime: int
    holds: bool
    factorization_holds: bool


def commute_ideal_generator(algebra: GroupAlgebra, n: int, n_prime: int, j: int = 0) -> CommuteCertificate:
    """Verify the two-sidedness identity for (w2_j^N - 1)^N' at finite level.

    Checks (w2^N-1)^N' phi^-1 = phi^-1 (w2^(ell^f N)-1)^N' together with the
    factorization (w2^(ell^f N)-1)^N' = (sum_i w2^(iN))^N' (w2^N-1)^N'.
    """
    g = algebra.group
    phi_inv = algebra.element_vector([(g.inv(g.generator("phi")), 1)])
    lhs = algebra.mul(algebra.binomial_element(g.w2(j), n_prime, base_power=n), phi_inv)
    lf = pow(g.ell, g.f, 1 << 60)
    rhs = algebra.mul(
        phi_inv, algebra.binomial_element(g.w2(j), n_prime, base_power=lf * n)
    )
    holds = bool(np.array_equal(lhs, rhs))
    geom = algebra.zero()
    for i in range(lf):
        geom = (geom + algebra.element_vector([(g.power(g.w2(j), i * n), 1)])) % algebra.mod.q
    fact_lhs = algebra.binomial_element(g.w2(j), n_prime, base_power=lf * n)
    fact_rhs = algebra.mul(
        algebra.power(geom, n_prime), algebra.binomial_element(g.w2(j), n_prime, base_power=n)
    )
    fact = bool(np.array_equal(fact_lhs, fact_rhs))
    return CommuteCertificate(n, n_prime, holds, fact)
