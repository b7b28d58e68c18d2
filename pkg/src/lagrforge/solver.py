"""Inverse variational problem via a multiplier ansatz.

Each Lagrangian component is posed as L_k = sum_{a,s} lambda^k_{a,s} *
phi^a_s with every multiplier an unknown linear combination of monomials
in the field variables and group parameters.  Requiring the weak
Euler-Lagrange expressions to vanish identically yields an exact rational
homogeneous linear system; its nullspace parametrizes all Lagrangians the
ansatz contains.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .expr import (Expr, Power, RAT1, Rational, Role, Sym, SymbolInfo,
                   canonicalize, differentiate, monomial_expr, monomials,
                   substitute)

MAX_UNKNOWNS = 5000


class BasisTooLargeError(ValueError):
    """The requested monomial basis exceeds the unknown-count cap."""


class NonlinearInUnknownsError(ValueError):
    """A collected residual was not linear homogeneous in the unknowns."""


# ---------------------------------------------------------------------------
# Ansatz construction.


@dataclass
class MultiplierAnsatz:
    """Unknown multipliers lambda^k_{a,s} over a shared monomial basis.

    Keys (k, a, s) are 1-based: k indexes the Lagrangian component,
    a the constraint coordinate, s the constraint parameter.
    """

    lie: object
    deg_x: int
    deg_g: tuple
    basis: tuple                 # canonical monomials in fields and params
    unknowns: dict               # (k, a, s) -> tuple of SymbolInfo
    lambdas: dict                # (k, a, s) -> Expr
    columns: tuple               # all unknowns in column order
    col_index: dict

    def slots(self):
        r, n = self.lie.r, self.lie.n
        return [(k, a, s)
                for k in range(1, r + 1)
                for a in range(1, n + 1)
                for s in range(1, r + 1)]

    def lagrangian_component(self, k: int) -> Expr:
        lie = self.lie
        total = None
        for a in range(1, lie.n + 1):
            for s in range(1, lie.r + 1):
                term = self.lambdas[(k, a, s)] * lie.phi[a - 1][s - 1]
                total = term if total is None else total + term
        return canonicalize(total)


def build_ansatz(lie, deg_x: int = 1, deg_g=(0, 0),
                 max_unknowns: int = MAX_UNKNOWNS) -> MultiplierAnsatz:
    """Monomial ansatz with exponents 0..deg_x per field variable and
    deg_g[0]..deg_g[1] per group parameter (the range must contain 0)."""
    lo, hi = int(deg_g[0]), int(deg_g[1])
    if deg_x < 0 or lo > 0 or hi < 0:
        raise ValueError("deg_x must be >= 0 and the parameter exponent "
                         "range must contain 0")
    basis = []
    field_syms = [Sym(f) for f in lie.fields]
    param_syms = [Sym(p) for p in lie.spec.params]
    for xexp in itertools.product(range(deg_x + 1), repeat=lie.n):
        for gexp in itertools.product(range(lo, hi + 1), repeat=lie.r):
            mono = RAT1
            for fs, e in zip(field_syms, xexp):
                if e:
                    mono = mono * Power(fs, e)
            for ps, e in zip(param_syms, gexp):
                if e:
                    mono = mono * Power(ps, e)
            basis.append(canonicalize(mono))
    basis = tuple(sorted(set(basis), key=lambda e: e.sort_key()))
    return ansatz_from_basis(lie, basis, deg_x=deg_x, deg_g=(lo, hi),
                             max_unknowns=max_unknowns)


def ansatz_from_basis(lie, basis, deg_x=None, deg_g=None,
                      max_unknowns: int = MAX_UNKNOWNS) -> MultiplierAnsatz:
    """Ansatz over an explicit list of canonical basis monomials."""
    basis = tuple(canonicalize(b) for b in basis)
    r, n = lie.r, lie.n
    count = r * n * r * len(basis)
    if count > max_unknowns:
        raise BasisTooLargeError(
            f"{count} unknowns exceed the cap of {max_unknowns}; "
            "reduce the degree bounds or raise the cap")
    unknowns = {}
    lambdas = {}
    columns = []
    for k in range(1, r + 1):
        for a in range(1, n + 1):
            for s in range(1, r + 1):
                infos = tuple(
                    SymbolInfo(f"c{k}_{a}{s}_{m}", Role.ANSATZ_UNKNOWN)
                    for m in range(len(basis)))
                unknowns[(k, a, s)] = infos
                columns.extend(infos)
                total = None
                for info, mono in zip(infos, basis):
                    term = Sym(info) * mono
                    total = term if total is None else total + term
                lambdas[(k, a, s)] = canonicalize(total) if total is not None \
                    else Rational(0)
    columns = tuple(columns)
    return MultiplierAnsatz(lie=lie, deg_x=deg_x, deg_g=deg_g, basis=basis,
                            unknowns=unknowns, lambdas=lambdas,
                            columns=columns,
                            col_index={c: i for i, c in enumerate(columns)})


# ---------------------------------------------------------------------------
# Weak Euler-Lagrange residuals.


def weak_el_residual(lie, ansatz: MultiplierAnsatz, k: int, alpha: int) -> Expr:
    """Weak E-L expression for component (k, alpha), reduced on shell."""
    return weak_el_residual_of(lie, ansatz.lagrangian_component(k), alpha)


def weak_el_residual_of(lie, L: Expr, alpha: int) -> Expr:
    """Weak E-L residual of an explicit Lagrangian component.

    dL/dX'^alpha minus the total parameter derivatives of dL/dX'^alpha_i;
    the chain rule introduces jets and every jet is then replaced by its
    on-shell value, which is the only sense in which terms are dropped.
    """
    f_alpha = lie.fields[alpha - 1]
    resid = differentiate(L, f_alpha)
    for i, p in enumerate(lie.spec.params):
        A = differentiate(L, lie.jets[alpha - 1][i])
        dA = differentiate(A, p)
        for b in range(lie.n):
            dA = dA + differentiate(A, lie.fields[b]) * Sym(lie.jets[b][i])
        resid = resid - dA
    return substitute(resid, lie.onshell)


def lambda_map_residual(lie, lambda_map: dict, k: int, alpha: int) -> Expr:
    """Residual for explicit multiplier expressions keyed by (a, s) or
    (k, a, s); useful for checking a candidate solution directly."""
    total = None
    for a in range(1, lie.n + 1):
        for s in range(1, lie.r + 1):
            lam = lambda_map.get((k, a, s), lambda_map.get((a, s)))
            if lam is None:
                continue
            term = canonicalize(lam) * lie.phi[a - 1][s - 1]
            total = term if total is None else total + term
    if total is None:
        total = Rational(0)
    return weak_el_residual_of(lie, canonicalize(total), alpha)


# ---------------------------------------------------------------------------
# Exact linear system.


@dataclass
class RowTag:
    k: int
    alpha: int
    monomial: str


@dataclass
class LinearSystem:
    columns: tuple           # unknown symbols, fixed order
    rows: list               # list of Fraction lists
    tags: list               # RowTag per row

    _rref_cache: object = None

    def rref(self):
        if self._rref_cache is None:
            self._rref_cache = rref(self.rows, len(self.columns))
        return self._rref_cache

    @property
    def rank(self) -> int:
        return len(self.rref()[1])


def collect_system(residuals, ansatz: MultiplierAnsatz, tags=None) -> LinearSystem:
    """Turn residual expressions into exact rows over the ansatz unknowns.

    Each residual is cleared of parameter denominators by the minimal
    parameter monomial, then split by monomials in everything that is not
    an unknown; each monomial contributes one homogeneous row.
    """
    ncols = len(ansatz.columns)
    col_index = ansatz.col_index
    rows = []
    out_tags = []
    for ridx, resid in enumerate(residuals):
        monos = monomials(resid)
        if len(monos) == 1 and monos[0][0] == 0:
            continue
        mins: dict = {}
        for _, pairs in monos:
            for atom, n in pairs:
                if n < 0 and isinstance(atom, Sym) \
                        and atom.info.role == Role.GROUP_PARAMETER:
                    key = atom.sort_key()
                    mins[key] = min(mins.get(key, 0), n)
        shift = {k: -v for k, v in mins.items()}
        grouped: dict = {}
        for coeff, pairs in monos:
            if coeff == 0:
                continue
            unknown = None
            rest = []
            for atom, n in pairs:
                if isinstance(atom, Sym) and atom.info.role == Role.ANSATZ_UNKNOWN:
                    if unknown is not None or n != 1:
                        raise NonlinearInUnknownsError(
                            "residual is not linear in the ansatz unknowns; "
                            "multipliers must enter the Lagrangian linearly")
                    unknown = atom.info
                else:
                    k = atom.sort_key()
                    if k in shift:
                        n = n + shift[k]
                    if n != 0:
                        rest.append((atom, n))
            if unknown is None:
                raise NonlinearInUnknownsError(
                    "residual carries a term free of ansatz unknowns")
            # parameters absent from this monomial still pick up the
            # clearing factor so one multiplication covers the whole row
            for key, s in shift.items():
                if not any(a.sort_key() == key for a, _ in pairs):
                    atom = _atom_by_key(monos, key)
                    rest.append((atom, s))
            sig_pairs = tuple(sorted(rest, key=lambda p: p[0].sort_key()))
            sig = tuple((a.sort_key(), n) for a, n in sig_pairs)
            row = grouped.setdefault(sig, [Fraction(0)] * ncols)
            row[col_index[unknown]] += coeff
        tag_base = tags[ridx] if tags else (0, 0)
        for sig in sorted(grouped.keys()):
            row = grouped[sig]
            if all(v == 0 for v in row):
                continue
            pairs = _pairs_from_sig(monos, sig)
            rows.append(row)
            out_tags.append(RowTag(tag_base[0], tag_base[1],
                                   str(monomial_expr(Fraction(1), pairs))))
    return LinearSystem(columns=ansatz.columns, rows=rows, tags=out_tags)


def _atom_by_key(monos, key):
    for _, pairs in monos:
        for atom, _ in pairs:
            if atom.sort_key() == key:
                return atom
    raise AssertionError("atom key vanished during clearing")


def _pairs_from_sig(monos, sig):
    atoms = {}
    for _, pairs in monos:
        for atom, _ in pairs:
            atoms[atom.sort_key()] = atom
    return tuple((atoms[k], n) for k, n in sig if k in atoms)


def rref(matrix, ncols: int):
    """Reduced row echelon form over exact rationals; returns (rows, pivots)."""
    rows = [list(r) for r in matrix]
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def nullspace_vectors(system: LinearSystem):
    """Basis of the exact nullspace, one vector per free column."""
    reduced, pivots = system.rref()
    ncols = len(system.columns)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    vectors = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -reduced[i][f]
        vectors.append(vec)
    return vectors


# ---------------------------------------------------------------------------
# Lagrangian family.


@dataclass
class FamilyMember:
    vector: list             # coefficients over the ansatz columns
    multipliers: dict        # (k, a, s) -> Expr


@dataclass
class LagrangianFamily:
    lie: object
    ansatz: MultiplierAnsatz
    system: LinearSystem
    members: list            # FamilyMember, deterministic order
    free_params: tuple       # SymbolInfo a1..ad
    multipliers: dict        # (k, a, s) -> Expr linear in the free params
    lagrangians: list        # L_k, k = 1..r, linear in the free params

    @property
    def dimension(self) -> int:
        return len(self.members)

    def param_values(self, assignment) -> dict:
        """Normalize {name or SymbolInfo: number} to a full rational map."""
        values = {p: Fraction(0) for p in self.free_params}
        by_name = {p.name: p for p in self.free_params}
        for key, v in (assignment or {}).items():
            name = key.name if isinstance(key, SymbolInfo) else str(key)
            if name not in by_name:
                raise KeyError(f"unknown free parameter '{name}'")
            values[by_name[name]] = Fraction(v)
        return values

    def lagrangian_at(self, assignment) -> list:
        values = self.param_values(assignment)
        table = {p: Rational(v) for p, v in values.items()}
        return [substitute(L, table) for L in self.lagrangians]

    def multipliers_at(self, assignment) -> dict:
        values = self.param_values(assignment)
        table = {p: Rational(v) for p, v in values.items()}
        return {key: substitute(e, table) for key, e in self.multipliers.items()}

    def coordinates_of(self, lambda_map: dict):
        """Free-parameter values realizing explicit multipliers, or None.

        The multipliers must be expressible over the ansatz basis and lie
        in the span of the family members.
        """
        w = _basis_vector(self.ansatz, lambda_map)
        if w is None:
            return None
        d = len(self.members)
        rows = []
        for i in range(len(w)):
            rows.append([m.vector[i] for m in self.members] + [w[i]])
        reduced, pivots = rref(rows, d + 1)
        if d in pivots:
            return None  # inconsistent: w outside the span
        t = [Fraction(0)] * d
        for i, pc in enumerate(pivots):
            t[pc] = reduced[i][d]
        # over-determined consistency is guaranteed by rref; verify exactly
        for i in range(len(w)):
            acc = sum((t[j] * self.members[j].vector[i] for j in range(d)),
                      Fraction(0))
            if acc != w[i]:
                return None
        return {p.name: t[j] for j, p in enumerate(self.free_params)}


def _basis_vector(ansatz: MultiplierAnsatz, lambda_map: dict):
    """Coefficient vector of explicit multipliers over the ansatz columns."""
    sig_to_m = {}
    for m, mono in enumerate(ansatz.basis):
        ms = monomials(mono)
        if len(ms) != 1 or ms[0][0] != 1:
            raise AssertionError("ansatz basis must be unit monomials")
        sig_to_m[tuple((a.sort_key(), n) for a, n in ms[0][1])] = m
    w = [Fraction(0)] * len(ansatz.columns)
    nbasis = len(ansatz.basis)
    for key in ansatz.unknowns:
        expr = lambda_map.get(key, lambda_map.get(key[1:]))
        if expr is None:
            continue
        for coeff, pairs in monomials(canonicalize(expr)):
            if coeff == 0:
                continue
            sig = tuple((a.sort_key(), n) for a, n in pairs)
            m = sig_to_m.get(sig)
            if m is None:
                return None
            col = ansatz.col_index[ansatz.unknowns[key][m]]
            w[col] += coeff
    return w


def solve_family(lie, ansatz: MultiplierAnsatz) -> LagrangianFamily:
    """Collect the weak E-L system and assemble the solution family."""
    residuals = []
    tags = []
    for k in range(1, lie.r + 1):
        L = ansatz.lagrangian_component(k)
        for alpha in range(1, lie.n + 1):
            residuals.append(weak_el_residual_of(lie, L, alpha))
            tags.append((k, alpha))
    system = collect_system(residuals, ansatz, tags)
    vectors = nullspace_vectors(system)

    members = []
    for vec in vectors:
        lead = next((v for v in vec if v != 0), None)
        if lead is not None and lead != 1:
            vec = [v / lead for v in vec]
        members.append(FamilyMember(vector=vec,
                                    multipliers=_member_multipliers(ansatz, vec)))
    members.sort(key=lambda m: tuple(
        m.multipliers[key].sort_key() for key in sorted(m.multipliers)))

    free_params = tuple(SymbolInfo(f"a{d + 1}", Role.FREE_PARAMETER)
                        for d in range(len(members)))
    multipliers = {}
    for key in ansatz.unknowns:
        total = None
        for p, member in zip(free_params, members):
            term = Sym(p) * member.multipliers[key]
            total = term if total is None else total + term
        multipliers[key] = canonicalize(total) if total is not None \
            else Rational(0)
    lagrangians = []
    for k in range(1, lie.r + 1):
        total = None
        for a in range(1, lie.n + 1):
            for s in range(1, lie.r + 1):
                term = multipliers[(k, a, s)] * lie.phi[a - 1][s - 1]
                total = term if total is None else total + term
        lagrangians.append(canonicalize(total) if total is not None
                           else Rational(0))
    return LagrangianFamily(lie=lie, ansatz=ansatz, system=system,
                            members=members, free_params=free_params,
                            multipliers=multipliers, lagrangians=lagrangians)


def _member_multipliers(ansatz: MultiplierAnsatz, vec) -> dict:
    out = {}
    for key, infos in ansatz.unknowns.items():
        total = None
        for info, mono in zip(infos, ansatz.basis):
            c = vec[ansatz.col_index[info]]
            if c == 0:
                continue
            term = Rational(c) * mono
            total = term if total is None else total + term
        out[key] = canonicalize(total) if total is not None else Rational(0)
    return out
