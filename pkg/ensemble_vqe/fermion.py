"""
Second-quantized chemistry layer: FCIDUMP ingestion, frozen-core assembly,
Jordan-Wigner encoding, spin operators and generalized singles/doubles.

Spin-orbital ordering is interleaved: spatial orbital p owns spin-orbitals
2p (alpha) and 2p + 1 (beta). A computational basis index is an occupation
bitmask, and |x> = a+_{p1} a+_{p2} ... a+_{pn} |vac> with p1 < p2 < ... < pn.
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import settings
from .exceptions import ParseError, SizeLimitError, ValidationError
from .models.active_space import ActiveSpaceSpec
from .operators import PauliOperator, PauliSum, PauliWord

logger = logging.getLogger(__name__)

ALPHA, BETA = 0, 1
SYMMETRY_TOLERANCE = 1e-10
_FLOAT_FORMAT = "%.17g"


def spin_orbital(spatial: int, spin: int) -> int:
    return 2 * spatial + spin


# ============================================
# Integrals
# ============================================

@dataclass
class MolecularIntegrals:
    """Spatial-orbital integrals in chemists' notation (Hartree)"""
    orbital_count: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    electron_count: Optional[int] = None
    spin_twice: int = 0

    def __post_init__(self):
        n = self.orbital_count
        self.one_body = np.asarray(self.one_body, dtype=float).reshape(n, n)
        self.two_body = np.asarray(self.two_body, dtype=float).reshape(n, n, n, n)
        if n and np.max(np.abs(self.one_body - self.one_body.T)) > SYMMETRY_TOLERANCE:
            raise ValidationError("One-body integrals are not symmetric")
        if n:
            g = self.two_body
            for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
                if np.max(np.abs(g - g.transpose(perm))) > SYMMETRY_TOLERANCE:
                    raise ValidationError("Two-body integrals lack 8-fold symmetry")

    @classmethod
    def zeros(cls, orbital_count: int, core_energy: float = 0.0) -> "MolecularIntegrals":
        n = orbital_count
        return cls(n, core_energy, np.zeros((n, n)), np.zeros((n, n, n, n)))


def symmetrize_two_body(g: np.ndarray) -> np.ndarray:
    """Average a rank-4 tensor over the 8 real-orbital permutations"""
    g = 0.5 * (g + g.transpose(1, 0, 2, 3))
    g = 0.5 * (g + g.transpose(0, 1, 3, 2))
    return 0.5 * (g + g.transpose(2, 3, 0, 1))


def _eightfold(i: int, j: int, k: int, l: int):
    return {
        (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
        (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
    }


_HEADER_FIELD = re.compile(r"(NORB|NELEC|MS2)\s*=\s*(-?\d+)", re.IGNORECASE)


def read_fcidump(path: Union[str, Path]) -> MolecularIntegrals:
    """
    Read an FCIDUMP file

    The `&FCI ... &END` header is optional; without it the orbital count is
    taken from the largest index. Indices are 1-based; zeros mark one-body
    (`v i j 0 0`) and core (`v 0 0 0 0`) entries.

    Raises:
        ParseError: malformed line (with line number)
        ValidationError: inconsistent duplicates of a symmetric entry
    """
    path = Path(path)
    source = str(path)
    header: Dict[str, int] = {}
    entries: List[Tuple[int, float, Tuple[int, int, int, int]]] = []

    with open(path, "r", encoding="utf-8") as fin:
        lines = fin.readlines()

    in_header = False
    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("&") and not in_header and not entries:
            in_header = True
        if in_header:
            for key, value in _HEADER_FIELD.findall(line):
                header[key.upper()] = int(value)
            if "&END" in line.upper() or line == "/":
                in_header = False
            continue
        tokens = line.split()
        if len(tokens) != 5:
            raise ParseError(source, line_number, f"expected 5 fields, found {len(tokens)}")
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
            idx = tuple(int(t) for t in tokens[1:])
        except ValueError as e:
            raise ParseError(source, line_number, str(e))
        if any(i < 0 for i in idx):
            raise ParseError(source, line_number, "negative orbital index")
        entries.append((line_number, value, idx))

    if in_header:
        raise ParseError(source, len(lines), "unterminated &FCI header")

    norb = header.get("NORB")
    if norb is None:
        norb = max((max(idx) for _, _, idx in entries), default=0)
    ints = MolecularIntegrals.zeros(norb)
    ints.electron_count = header.get("NELEC")
    ints.spin_twice = header.get("MS2", 0)

    assigned_1 = np.zeros((norb, norb), dtype=bool)
    assigned_2 = np.zeros((norb,) * 4, dtype=bool)

    def _store(tensor, assigned, positions, value, line_number):
        for pos in positions:
            if assigned[pos] and abs(tensor[pos] - value) > SYMMETRY_TOLERANCE:
                raise ValidationError(
                    f"{source}:{line_number}: entry {tuple(p + 1 for p in pos)} conflicts with an earlier "
                    f"symmetric entry ({tensor[pos]!r} vs {value!r})"
                )
            tensor[pos] = value
            assigned[pos] = True

    for line_number, value, (i, j, k, l) in entries:
        if max(i, j, k, l) > norb:
            raise ParseError(source, line_number, f"index exceeds NORB={norb}")
        if i == j == k == l == 0:
            ints.core_energy = value
        elif k == 0 and l == 0 and i and j:
            _store(ints.one_body, assigned_1, {(i - 1, j - 1), (j - 1, i - 1)}, value, line_number)
        elif i and j and k and l:
            _store(ints.two_body, assigned_2, _eightfold(i - 1, j - 1, k - 1, l - 1), value, line_number)
        elif j == k == l == 0:
            logger.debug("Skipping orbital-energy line %d in %s", line_number, source)
        else:
            raise ParseError(source, line_number, f"unsupported index pattern {(i, j, k, l)}")

    logger.info("Read FCIDUMP %s: NORB=%d, %d entries", source, norb, len(entries))
    return ints


def write_fcidump(
    path: Union[str, Path],
    ints: MolecularIntegrals,
    electron_count: Optional[int] = None,
    tol: float = 0.0,
) -> Path:
    """Write the 8-fold-unique integrals with round-trip exact floats"""
    path = Path(path)
    n = ints.orbital_count
    nelec = electron_count if electron_count is not None else (ints.electron_count or 0)
    output_format = _FLOAT_FORMAT + " %4d %4d %4d %4d\n"
    with open(path, "w", encoding="utf-8") as fout:
        fout.write(" &FCI NORB=%4d,NELEC=%2d,MS2=%d,\n" % (n, nelec, ints.spin_twice))
        fout.write("  ORBSYM=%s\n" % ("1," * n))
        fout.write("  ISYM=1,\n")
        fout.write(" &END\n")
        for i in range(n):
            for j in range(i + 1):
                for k in range(n):
                    for l in range(k + 1):
                        if (i * (i + 1) // 2 + j) < (k * (k + 1) // 2 + l):
                            continue
                        value = ints.two_body[i, j, k, l]
                        if value != 0.0 and abs(value) > tol:
                            fout.write(output_format % (value, i + 1, j + 1, k + 1, l + 1))
        for i in range(n):
            for j in range(i + 1):
                value = ints.one_body[i, j]
                if value != 0.0 and abs(value) > tol:
                    fout.write(output_format % (value, i + 1, j + 1, 0, 0))
        fout.write(output_format % (ints.core_energy, 0, 0, 0, 0))
    return path


# ============================================
# Frozen core
# ============================================

@dataclass
class FrozenCoreHamiltonian:
    """Active-space integrals with the frozen-core mean-field shift and embedding potential"""
    active_one_body: np.ndarray
    active_two_body: np.ndarray
    scalar_shift: float
    active_electrons: int = 0
    active_orbitals: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def orbital_count(self) -> int:
        return self.active_one_body.shape[0]

    @property
    def qubit_count(self) -> int:
        return 2 * self.orbital_count

    @classmethod
    def from_integrals(cls, ints: MolecularIntegrals, electrons: int) -> "FrozenCoreHamiltonian":
        """Whole space active, nothing frozen"""
        return cls(
            ints.one_body.copy(), ints.two_body.copy(), float(ints.core_energy),
            electrons, tuple(range(ints.orbital_count)),
        )


def freeze_core(ints: MolecularIntegrals, spec: ActiveSpaceSpec) -> FrozenCoreHamiltonian:
    """
    Fold doubly occupied frozen orbitals into a scalar shift and an effective
    one-body potential on the active orbitals.
    """
    n = ints.orbital_count
    for idx in list(spec.frozen) + list(spec.active):
        if idx >= n:
            raise ValidationError(f"Orbital {idx} outside the {n}-orbital basis")
    if set(spec.frozen) & set(spec.active):
        raise ValidationError("Frozen and active orbitals overlap")

    h, g = ints.one_body, ints.two_body
    frozen = np.array(spec.frozen, dtype=int)
    active = np.array(spec.active, dtype=int)

    shift = float(ints.core_energy)
    if frozen.size:
        shift += 2.0 * float(np.sum(h[frozen, frozen]))
        for i in frozen:
            for j in frozen:
                shift += 2.0 * g[i, i, j, j] - g[i, j, j, i]

    one_body = h[np.ix_(active, active)].copy()
    for i in frozen:
        one_body += 2.0 * g[np.ix_(active, active, [i], [i])][:, :, 0, 0]
        one_body -= g[np.ix_(active, [i], [i], active)][:, 0, 0, :]
    two_body = g[np.ix_(active, active, active, active)].copy()

    logger.debug(
        "Frozen %d orbitals, %d active, shift %.12f", frozen.size, active.size, shift
    )
    return FrozenCoreHamiltonian(one_body, two_body, shift, spec.active_electrons, tuple(spec.active))


# ============================================
# Ladder operators and Jordan-Wigner
# ============================================

@dataclass(frozen=True)
class FermionTerm:
    """coefficient * product of ladder operators, leftmost applied last"""
    ops: Tuple[Tuple[int, bool], ...]  # (spin-orbital, is_creation)
    coefficient: float = 1.0

    def adjoint(self) -> "FermionTerm":
        return FermionTerm(tuple((p, not c) for p, c in reversed(self.ops)), self.coefficient)

    def max_index(self) -> int:
        return max((p for p, _ in self.ops), default=-1)

    def __str__(self) -> str:
        return f"{self.coefficient:+g} " + " ".join(f"a{'+' if c else ''}_{p}" for p, c in self.ops)


def _ladder(index: int, creation: bool, qubit_count: int) -> PauliSum:
    """a+_p = Z_0..Z_{p-1} (X_p - iY_p)/2, a_p = Z_0..Z_{p-1} (X_p + iY_p)/2"""
    if not 0 <= index < qubit_count:
        raise ValidationError(f"Spin-orbital {index} outside a {qubit_count}-mode register")
    z_string = (1 << index) - 1
    x_word = PauliWord(qubit_count, 1 << index, z_string)
    y_word = PauliWord(qubit_count, 1 << index, z_string | (1 << index))
    sign = -1j if creation else 1j
    return PauliSum(qubit_count, {x_word: 0.5, y_word: 0.5 * sign})


def jordan_wigner_term(term: FermionTerm, qubit_count: int) -> PauliSum:
    out = PauliSum.identity(qubit_count, term.coefficient)
    for index, creation in term.ops:
        out = out @ _ladder(index, creation, qubit_count)
    return out.pruned()


def jordan_wigner_terms(terms: Sequence[FermionTerm], qubit_count: int) -> PauliSum:
    out = PauliSum(qubit_count)
    for term in terms:
        out += jordan_wigner_term(term, qubit_count)
    return out.pruned()


def jordan_wigner(h: FrozenCoreHamiltonian) -> PauliOperator:
    """Qubit image of the frozen-core Hamiltonian (scalar shift on the identity)"""
    n = h.orbital_count
    if n > settings.MAX_JW_ORBITALS:
        raise SizeLimitError("Active orbital count", n, settings.MAX_JW_ORBITALS)
    if n == 0:
        raise ValidationError("Jordan-Wigner mapping needs at least one active orbital")
    nq = 2 * n
    create = [_ladder(k, True, nq) for k in range(nq)]
    annihilate = [_ladder(k, False, nq) for k in range(nq)]

    out = PauliSum.identity(nq, h.scalar_shift)
    for p, q in itertools.product(range(n), repeat=2):
        if abs(h.active_one_body[p, q]) < settings.PRUNE_TOLERANCE:
            continue
        for spin in (ALPHA, BETA):
            hop = create[spin_orbital(p, spin)] @ annihilate[spin_orbital(q, spin)]
            out += hop.scale(h.active_one_body[p, q])

    # 1/2 sum g_pqrs a+_{p s1} a+_{r s2} a_{s s2} a_{q s1}
    pair_create: Dict[Tuple[int, int], PauliSum] = {}
    pair_annihilate: Dict[Tuple[int, int], PauliSum] = {}
    for (p, q, r, s) in itertools.product(range(n), repeat=4):
        g = h.active_two_body[p, q, r, s]
        if abs(g) < settings.PRUNE_TOLERANCE:
            continue
        for s1, s2 in itertools.product((ALPHA, BETA), repeat=2):
            i, j = spin_orbital(p, s1), spin_orbital(q, s1)
            k, l = spin_orbital(r, s2), spin_orbital(s, s2)
            if i == k or j == l:
                continue
            if (i, k) not in pair_create:
                pair_create[(i, k)] = create[i] @ create[k]
            if (l, j) not in pair_annihilate:
                pair_annihilate[(l, j)] = annihilate[l] @ annihilate[j]
            out += (pair_create[(i, k)] @ pair_annihilate[(l, j)]).scale(0.5 * g)

    op = out.pruned().to_operator()
    logger.debug("Jordan-Wigner: %d orbitals -> %d Pauli terms on %d qubits", n, len(op), nq)
    return op


def number_operator(active_orbitals: int) -> PauliOperator:
    nq = 2 * active_orbitals
    terms = [FermionTerm(((k, True), (k, False))) for k in range(nq)]
    return jordan_wigner_terms(terms, nq).to_operator()


def sz_operator(active_orbitals: int) -> PauliOperator:
    nq = 2 * active_orbitals
    terms = [
        FermionTerm(((spin_orbital(p, s), True), (spin_orbital(p, s), False)), 0.5 if s == ALPHA else -0.5)
        for p in range(active_orbitals)
        for s in (ALPHA, BETA)
    ]
    return jordan_wigner_terms(terms, nq).to_operator()


def s_squared_operator(active_orbitals: int) -> PauliOperator:
    """S^2 = S- S+ + Sz (Sz + 1) in the interleaved ordering"""
    if active_orbitals < 1:
        raise ValidationError("S^2 needs at least one active orbital")
    if active_orbitals > settings.MAX_JW_ORBITALS:
        raise SizeLimitError("Active orbital count", active_orbitals, settings.MAX_JW_ORBITALS)
    nq = 2 * active_orbitals
    s_plus = jordan_wigner_terms(
        [FermionTerm(((spin_orbital(p, ALPHA), True), (spin_orbital(p, BETA), False)))
         for p in range(active_orbitals)],
        nq,
    )
    s_minus = s_plus.adjoint()
    sz = sz_operator(active_orbitals).to_pauli_sum()
    total = s_minus @ s_plus + sz @ sz + sz
    return total.pruned().to_operator()


def excitation_operator(p: int, q: int) -> List[FermionTerm]:
    """Spin-free E_pq = sum_sigma a+_{p sigma} a_{q sigma}"""
    return [
        FermionTerm(((spin_orbital(p, s), True), (spin_orbital(q, s), False)))
        for s in (ALPHA, BETA)
    ]


# ============================================
# Determinant algebra
# ============================================

def apply_ladder_string(ops: Sequence[Tuple[int, bool]], bits: int) -> Optional[Tuple[int, int]]:
    """Apply a ladder string (rightmost first) to an occupation bitmask -> (sign, bits) or None"""
    sign = 1
    for index, creation in reversed(ops):
        occupied = (bits >> index) & 1
        if creation == bool(occupied):
            return None
        if bin(bits & ((1 << index) - 1)).count("1") % 2:
            sign = -sign
        bits ^= 1 << index
    return sign, bits


def sector_indices(qubit_count: int, n_alpha: int, n_beta: int) -> np.ndarray:
    """Basis indices with the given alpha (even qubits) and beta (odd qubits) occupations"""
    alpha_mask = sum(1 << q for q in range(0, qubit_count, 2))
    beta_mask = sum(1 << q for q in range(1, qubit_count, 2))
    out = [
        x for x in range(1 << qubit_count)
        if bin(x & alpha_mask).count("1") == n_alpha and bin(x & beta_mask).count("1") == n_beta
    ]
    return np.array(out, dtype=np.int64)


def fci_matrix(h: FrozenCoreHamiltonian, n_alpha: int, n_beta: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Dense Hamiltonian in the determinant basis of a fixed (N_alpha, N_beta) sector

    Built from ladder-operator algebra on occupation bitmasks, independently of
    the Pauli representation. Determinants are ordered by ascending bitmask.

    Returns:
        (matrix, determinant bitmasks)
    """
    n = h.orbital_count
    dets = sector_indices(2 * n, n_alpha, n_beta)
    position = {int(d): i for i, d in enumerate(dets)}
    mat = np.zeros((len(dets), len(dets)))

    terms: List[FermionTerm] = []
    for p, q in itertools.product(range(n), repeat=2):
        if h.active_one_body[p, q] != 0.0:
            for s in (ALPHA, BETA):
                terms.append(FermionTerm(
                    ((spin_orbital(p, s), True), (spin_orbital(q, s), False)), h.active_one_body[p, q]
                ))
    for p, q, r, s in itertools.product(range(n), repeat=4):
        g = h.active_two_body[p, q, r, s]
        if g == 0.0:
            continue
        for s1, s2 in itertools.product((ALPHA, BETA), repeat=2):
            terms.append(FermionTerm((
                (spin_orbital(p, s1), True), (spin_orbital(r, s2), True),
                (spin_orbital(s, s2), False), (spin_orbital(q, s1), False),
            ), 0.5 * g))

    for col, det in enumerate(dets):
        mat[col, col] += h.scalar_shift
        for term in terms:
            result = apply_ladder_string(term.ops, int(det))
            if result is None:
                continue
            sign, out = result
            mat[position[out], col] += sign * term.coefficient
    return mat, dets


# ============================================
# Generalized singles and doubles
# ============================================

@dataclass(frozen=True)
class GeneratorBundle:
    """Real anti-Hermitian generator tau - tau^dagger for one amplitude"""
    kind: str
    indices: Tuple[int, ...]
    terms: Tuple[FermionTerm, ...]

    @property
    def label(self) -> str:
        return f"{self.kind}{self.indices}"

    def to_pauli_sum(self, qubit_count: int) -> PauliSum:
        return jordan_wigner_terms(self.terms, qubit_count)


def _antihermitian(ops: Tuple[Tuple[int, bool], ...]) -> Tuple[FermionTerm, ...]:
    tau = FermionTerm(ops, 1.0)
    dagger = tau.adjoint()
    return tau, FermionTerm(dagger.ops, -1.0)


def enumerate_guccsd_generators(active_orbitals: int) -> List[GeneratorBundle]:
    """
    Spin-conserving generalized singles then doubles, lexicographic within each class

    Singles: a+_p a_q - h.c. for spin-orbitals p > q of equal spin.
    Doubles: a+_q a+_p a_s a_r - h.c. for disjoint pairs p < q, r < s with equal
    total S_z, keeping only (p, q) > (r, s) since the swapped pair gives -T.
    """
    if active_orbitals < 1:
        raise ValidationError("At least one active orbital is required")
    nso = 2 * active_orbitals
    bundles: List[GeneratorBundle] = []

    for p in range(nso):
        for q in range(p):
            if p % 2 == q % 2:
                bundles.append(GeneratorBundle("single", (p, q), _antihermitian(((p, True), (q, False)))))

    pairs = list(itertools.combinations(range(nso), 2))
    for (p, q) in pairs:
        for (r, s) in pairs:
            if (p, q) <= (r, s) or {p, q} & {r, s}:
                continue
            if (p % 2) + (q % 2) != (r % 2) + (s % 2):
                continue
            ops = ((q, True), (p, True), (s, False), (r, False))
            bundles.append(GeneratorBundle("double", (p, q, r, s), _antihermitian(ops)))

    logger.debug(
        "GUCCSD generators for %d orbitals: %d", active_orbitals, len(bundles)
    )
    return bundles
