import unittest
import numpy as np
from numpy.testing import assert_allclose
from unittest.mock import patch
import contextlib
import io
import json
import os
import tempfile

from config import CheckConfig, threads_from_env
from errors import (
    BadDimension,
    DimensionMismatch,
    InvalidState,
    MalformedQuiver,
    ModeOutOfRange,
    NotOrthogonal,
    NotUnitary,
    PartyOutOfRange,
    ShapeMismatch,
    StateFileError,
    WrongArity,
    WrongDimension,
)
from hypermatrix import Hypermatrix, fold, kron, multilinear_mult, outer_chain, outer_product, unfold, vec
from qudit_state import (
    DensityMatrix,
    TensorRep,
    extract,
    gell_mann_basis,
    max_imaginary_residue,
    nonempty_subsets,
    parse_subset_label,
    partial_trace,
    random_density,
    reconstruct,
    subset_label,
    zero_rep,
)
from lu_action import (
    LocalUnitaries,
    check_orthogonal,
    conjugate_local,
    generate_pair,
    induced_orthogonal,
    induced_orthogonals,
    push_forward,
    random_local_unitaries,
    random_orthogonal,
    random_special_unitary,
    sign_flip_pair,
)
from specht import (
    CONSISTENT,
    DISTINGUISHED,
    INCONCLUSIVE,
    Alphabet,
    Quiver,
    QuiverMatrixRep,
    bound_label,
    cyclic_canonical,
    enumerate_words,
    futorny_quiver,
    futorny_two_block_check,
    jing_check,
    jing_ceiling,
    laffey_ceiling,
    loop_quiver,
    minimal_r,
    necklaces,
    oriented_cycles,
    parallel_quiver,
    quiver_cycle_check,
    specht_check,
    trace_of_word,
)
from equivalence import (
    CONSISTENT_AT_HORIZON,
    EQUIVALENT,
    PIPELINE_DISTINGUISHED,
    PIPELINE_INCONCLUSIVE,
    Rep2,
    build_battery_v1,
    build_battery_v2,
    check_lu_2qubit,
    check_quasi_lu_2,
    check_quasi_lu_3,
    gram_conditions,
    necessary_screen_3,
    qubit_lu_upgrade,
    rep2_from,
    rep3_from,
    so2_witness_check,
    so3_witness_check,
)
from serialization import (
    dumps,
    load_json,
    load_state,
    matrices_from_dict,
    rep_from_dict,
    rep_to_dict,
    sha256_hex,
    state_from_dict,
    state_to_dict,
)
from main import VERDICT_EXIT_CODES, exit_code_for, main, parse_dims

GOLDEN = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")


def random_tensor(rng, dims):
    return rng.standard_normal(dims)


def run_cli(*argv):
    """Run the CLI quietly, returning (exit code, stdout)."""
    out = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
        code = main(list(argv))
    return code, out.getvalue()


def write_json(path, data):
    with open(path, "w") as f:
        json.dump(data, f)
    return path


class TestConfig(unittest.TestCase):
    """Test CheckConfig validation and the thread environment variable"""

    def test_defaults(self):
        """Defaults are horizon 6 and tol 1e-8"""
        config = CheckConfig(threads=1)
        self.assertEqual(config.horizon, 6)
        self.assertEqual(config.tol, 1e-8)
        self.assertEqual(config.bound, "square")

    def test_invalid_parameters(self):
        """Make sure we catch all invalid parameter combinations"""
        with self.assertRaises(ValueError):
            CheckConfig(horizon=0)
        with self.assertRaises(ValueError):
            CheckConfig(tol=0.0)
        with self.assertRaises(ValueError):
            CheckConfig(battery=3)
        with self.assertRaises(ValueError):
            CheckConfig(bound="cubic")
        with self.assertRaises(ValueError):
            CheckConfig(threads=0)

    def test_to_dict_drops_runtime_fields(self):
        data = CheckConfig(debug=True, threads=2).to_dict()
        self.assertNotIn("debug", data)
        self.assertNotIn("threads", data)
        self.assertEqual(data["horizon"], 6)

    def test_threads_from_env(self):
        """Bad values fall back to the default"""
        with patch.dict(os.environ, {"LU_EQUIV_THREADS": "3"}):
            self.assertEqual(threads_from_env(), 3)
        with patch.dict(os.environ, {"LU_EQUIV_THREADS": "many"}):
            with contextlib.redirect_stdout(io.StringIO()):
                self.assertEqual(threads_from_env(), 1)
        with patch.dict(os.environ, {"LU_EQUIV_THREADS": "-2"}):
            with contextlib.redirect_stdout(io.StringIO()):
                self.assertEqual(threads_from_env(), 1)


class TestHypermatrix(unittest.TestCase):
    """Test hypermatrix storage, unfoldings and multilinear products"""

    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_column_major_offsets(self):
        """Offset of (i, j, k) is i + j*n1 + k*n1*n2"""
        A = Hypermatrix(random_tensor(self.rng, (2, 3, 4)))
        self.assertEqual(A.offset((1, 2, 3)), 1 + 2 * 2 + 3 * 6)
        self.assertEqual(A.data[A.offset((1, 2, 3))], A[1, 2, 3])
        B = Hypermatrix.from_flat((2, 3, 4), A.data)
        assert_allclose(B.array, A.array)
        with self.assertRaises(DimensionMismatch):
            A.offset((2, 0, 0))

    def test_immutable(self):
        A = Hypermatrix(np.ones((2, 2)))
        with self.assertRaises(ValueError):
            A.array[0, 0] = 5.0

    def test_unfolding_identities(self):
        """(A1, A2, A3) * T unfolds to A_k T_(k) (kron of the other two, reversed)^t"""
        for _ in range(20):
            T = random_tensor(self.rng, (2, 3, 4))
            A1 = self.rng.standard_normal((5, 2))
            A2 = self.rng.standard_normal((3, 3))
            A3 = self.rng.standard_normal((2, 4))
            M = multilinear_mult([A1, A2, A3], T)
            assert_allclose(unfold(M, 1), A1 @ unfold(T, 1) @ kron(A3, A2).T, atol=1e-12)
            assert_allclose(unfold(M, 2), A2 @ unfold(T, 2) @ kron(A3, A1).T, atol=1e-12)
            assert_allclose(unfold(M, 3), A3 @ unfold(T, 3) @ kron(A2, A1).T, atol=1e-12)

    def test_unfold_of_outer_product(self):
        """(u o v o w)_(1) = u (w kron v)^t"""
        u, v, w = self.rng.standard_normal(2), self.rng.standard_normal(3), self.rng.standard_normal(4)
        T = outer_chain([u, v, w])
        self.assertEqual(T.dims, (2, 3, 4))
        assert_allclose(unfold(T, 1), np.outer(u, np.kron(w, v)), atol=1e-12)
        assert_allclose(unfold(T, 3), np.outer(w, np.kron(v, u)), atol=1e-12)

    def test_fold_inverts_unfold(self):
        T = random_tensor(self.rng, (3, 2, 4))
        for k in (1, 2, 3):
            assert_allclose(fold(unfold(T, k), k, T.shape).array, T)

    def test_vec_identity(self):
        """vec(A X B) = (B^t kron A) vec(X)"""
        A = self.rng.standard_normal((3, 4))
        X = self.rng.standard_normal((4, 5))
        B = self.rng.standard_normal((5, 2))
        assert_allclose(vec(A @ X @ B), kron(B.T, A) @ vec(X), atol=1e-12)

    def test_multilinear_composition(self):
        """(X1, X2) * ((Y1, Y2) * A) = (X1 Y1, X2 Y2) * A"""
        A = self.rng.standard_normal((3, 4))
        X1, Y1 = self.rng.standard_normal((2, 3)), self.rng.standard_normal((3, 3))
        X2, Y2 = self.rng.standard_normal((4, 4)), self.rng.standard_normal((4, 4))
        lhs = multilinear_mult([X1, X2], multilinear_mult([Y1, Y2], A))
        rhs = multilinear_mult([X1 @ Y1, X2 @ Y2], A)
        assert_allclose(lhs.array, rhs.array, atol=1e-12)
        # For matrices the product is X1 A X2^t
        assert_allclose(multilinear_mult([Y1, Y2], A).array, Y1 @ A @ Y2.T, atol=1e-12)

    def test_bilinearity(self):
        """Linear in the tensor and in each matrix slot"""
        for _ in range(20):
            alpha, beta = self.rng.standard_normal(2)
            A = random_tensor(self.rng, (2, 3, 4))
            B = random_tensor(self.rng, (2, 3, 4))
            X = [self.rng.standard_normal((3, n)) for n in (2, 3, 4)]
            lhs = multilinear_mult(X, alpha * A + beta * B).array
            rhs = alpha * multilinear_mult(X, A).array + beta * multilinear_mult(X, B).array
            assert_allclose(lhs, rhs, atol=1e-12)
            # Each mode slot separately
            for k in range(3):
                Y = list(X)
                Y[k] = self.rng.standard_normal(X[k].shape)
                mixed = list(X)
                mixed[k] = alpha * X[k] + beta * Y[k]
                lhs = multilinear_mult(mixed, A).array
                rhs = alpha * multilinear_mult(X, A).array + beta * multilinear_mult(Y, A).array
                assert_allclose(lhs, rhs, atol=1e-12)

    def test_outer_product_commutes_with_multilinear_mult(self):
        """(Xa, Xb, Xc) * (v o M) = (Xa v) o ((Xb, Xc) * M)"""
        for _ in range(20):
            v = self.rng.standard_normal(3)
            M = self.rng.standard_normal((4, 2))
            Xa = self.rng.standard_normal((2, 3))
            Xb = self.rng.standard_normal((5, 4))
            Xc = self.rng.standard_normal((3, 2))
            lhs = multilinear_mult([Xa, Xb, Xc], outer_product(v, M))
            rhs = outer_product(Xa @ v, multilinear_mult([Xb, Xc], M))
            self.assertEqual(lhs.dims, (2, 5, 3))
            assert_allclose(lhs.array, rhs.array, atol=1e-12)

    def test_unfoldings_of_vector_matrix_products(self):
        """(v o M)_(1) = v o vec(M) and (M o v)_(3)^t = vec(M) o v"""
        v = self.rng.standard_normal(3)
        M = self.rng.standard_normal((2, 4))
        assert_allclose(unfold(outer_product(v, M), 1), outer_product(v, vec(M)).array, atol=1e-15)
        assert_allclose(unfold(outer_product(M, v), 3).T, outer_product(vec(M), v).array, atol=1e-12)
        # vec((A1, A2) * M) = (A2 kron A1) vec(M)
        A1, A2 = self.rng.standard_normal((3, 2)), self.rng.standard_normal((5, 4))
        assert_allclose(vec(multilinear_mult([A1, A2], M)), kron(A2, A1) @ vec(M), atol=1e-12)

    def test_outer_product_dims(self):
        A = outer_product(np.ones((2, 3)), np.ones(4))
        self.assertEqual(A.dims, (2, 3, 4))
        self.assertEqual(A.order, 3)

    def test_errors(self):
        T = random_tensor(self.rng, (2, 3))
        with self.assertRaises(ModeOutOfRange):
            unfold(T, 0)
        with self.assertRaises(ModeOutOfRange):
            unfold(T, 3)
        with self.assertRaises(DimensionMismatch):
            multilinear_mult([np.eye(2)], T)
        with self.assertRaises(DimensionMismatch):
            multilinear_mult([np.eye(2), np.eye(2)], T)
        # Everything is a ValueError underneath
        with self.assertRaises(ValueError):
            unfold(T, 5)


class TestQuditState(unittest.TestCase):
    """Test density matrices, the Gell-Mann basis and tensor extraction"""

    def test_gell_mann_orthonormal(self):
        """Tr(l_i l_j) = delta_ij, Hermitian and traceless for d = 2..5"""
        for d in range(2, 6):
            L = gell_mann_basis(d).elems
            self.assertEqual(L.shape, (d * d - 1, d, d))
            gram = np.einsum("iab,jba->ij", L, L)
            assert_allclose(gram, np.eye(d * d - 1), atol=1e-12)
            assert_allclose(np.einsum("iaa->i", L), 0, atol=1e-12)
            assert_allclose(L, np.conj(np.transpose(L, (0, 2, 1))), atol=1e-12)

    def test_gell_mann_qubit_is_pauli(self):
        L = gell_mann_basis(2).elems * np.sqrt(2)
        assert_allclose(L[0], [[0, 1], [1, 0]])
        assert_allclose(L[1], [[0, -1j], [1j, 0]])
        assert_allclose(L[2], [[1, 0], [0, -1]])
        with self.assertRaises(BadDimension):
            gell_mann_basis(1)

    def test_subsets(self):
        self.assertEqual(list(nonempty_subsets(3)), [(1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)])
        self.assertEqual(subset_label((1, 2)), "T12")
        self.assertEqual(parse_subset_label("T123"), (1, 2, 3))

    def test_product_state_tensors(self):
        """|00> gives T1 = T2 = (0, 0, 1/sqrt2) and T12 = diag(0, 0, 1/2)"""
        rho = DensityMatrix.from_pure([2, 2], [1, 0, 0, 0])
        rep = extract(rho)
        assert_allclose(np.asarray(rep["T1"]), [0, 0, 1 / np.sqrt(2)], atol=1e-12)
        assert_allclose(np.asarray(rep["T2"]), [0, 0, 1 / np.sqrt(2)], atol=1e-12)
        expected = np.zeros((3, 3))
        expected[2, 2] = 0.5
        assert_allclose(np.asarray(rep["T12"]), expected, atol=1e-12)

    def test_bell_state_tensors(self):
        """Bell state has vanishing local tensors and T12 = diag(1, -1, 1)/2"""
        rep = extract(DensityMatrix.from_pure([2, 2], [1, 0, 0, 1]))
        assert_allclose(np.asarray(rep["T1"]), 0, atol=1e-12)
        assert_allclose(np.asarray(rep["T12"]), np.diag([0.5, -0.5, 0.5]), atol=1e-12)

    def test_maximally_mixed_is_zero(self):
        rep = extract(DensityMatrix.maximally_mixed([2, 3]))
        for _, T in rep.items():
            assert_allclose(T.array, 0, atol=1e-12)
        assert_allclose(reconstruct(zero_rep([2, 3])).mat, np.eye(6) / 6, atol=1e-12)

    def test_round_trip(self):
        """reconstruct(extract(rho)) = rho across partitions"""
        for dims in [(2, 2), (2, 3), (3, 3), (2, 2, 2), (2, 2, 3)]:
            for seed in range(5):
                rho = random_density(dims, seed)
                assert_allclose(reconstruct(extract(rho)).mat, rho.mat, atol=1e-12)

    def test_partial_trace_matches_restriction(self):
        """extract(Tr_k rho) equals the sub-representation on the remaining parties"""
        rho = random_density((2, 2, 3), 11)
        rep = extract(rho)
        for k in (1, 2, 3):
            keep = [p for p in (1, 2, 3) if p != k]
            reduced = extract(partial_trace(rho, k))
            restricted = rep.restrict(keep)
            self.assertEqual(reduced.dims, restricted.dims)
            for label, T in restricted.labelled().items():
                assert_allclose(np.asarray(reduced[label]), T.array, atol=1e-12)
        with self.assertRaises(PartyOutOfRange):
            partial_trace(rho, 4)

    def test_invalid_states(self):
        """Each invariant is reported with its residual"""
        with self.assertRaises(InvalidState):
            DensityMatrix([2], [[0.5, 1.0], [0.0, 0.5]])
        with self.assertRaises(InvalidState):
            DensityMatrix([2], np.eye(2))
        with self.assertRaises(InvalidState) as ctx:
            DensityMatrix([2], np.diag([1.5, -0.5]))
        self.assertIn("positive semidefinite", str(ctx.exception))
        with self.assertRaises(ShapeMismatch):
            DensityMatrix([2, 2], np.eye(2) / 2)

    def test_non_finite_states_rejected(self):
        """NaN and infinite entries fail validation instead of slipping past the tolerances"""
        with self.assertRaises(InvalidState):
            DensityMatrix([2], [[np.nan, 0.0], [0.0, 0.5]])
        with self.assertRaises(InvalidState):
            DensityMatrix([2], [[np.inf, 0.0], [0.0, 0.5]])
        # Unchecked matrices only fail once validated
        rho = DensityMatrix([2], [[np.nan, 0.0], [0.0, 0.5]], check=False)
        with self.assertRaises(InvalidState):
            extract(rho)

    def test_extraction_is_real(self):
        """Imaginary parts of every correlation stay below 1e-10"""
        for dims in [(2, 2), (2, 3), (3, 3), (2, 2, 2)]:
            for seed in range(5):
                self.assertLessEqual(max_imaginary_residue(random_density(dims, seed)), 1e-10)

    def test_tensor_rep_validation(self):
        rep = zero_rep((2, 2))
        tensors = dict(rep.items())
        del tensors[(1, 2)]
        with self.assertRaises(ShapeMismatch):
            TensorRep((2, 2), tensors)
        tensors[(1, 2)] = np.zeros((3, 2))
        with self.assertRaises(ShapeMismatch):
            TensorRep((2, 2), tensors)


class TestLUAction(unittest.TestCase):
    """Test local unitaries and the orthogonal action they induce"""

    def test_z_rotation_induces_planar_rotation(self):
        """A quarter turn about z rotates the (x, y) Bloch components"""
        U = np.diag([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)])
        O = induced_orthogonal(U, gell_mann_basis(2))
        assert_allclose(O, [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-12)

    def test_equivariance(self):
        """extract(U rho U^dagger) = push_forward(extract(rho), induced O)"""
        for dims in [(2, 2), (2, 2, 2), (3, 2)]:
            for seed in range(10):
                rng = np.random.default_rng(seed)
                rho = random_density(dims, rng)
                u = random_local_unitaries(dims, rng)
                os_ = induced_orthogonals(u)
                lhs = extract(conjugate_local(rho, u))
                rhs = push_forward(extract(rho), os_)
                for label, T in lhs.labelled().items():
                    assert_allclose(T.array, np.asarray(rhs[label]), atol=1e-10)
                if all(d == 2 for d in dims):
                    for O in os_.os:
                        self.assertAlmostEqual(np.linalg.det(O), 1.0, places=12)

    def test_random_generators(self):
        U = random_special_unitary(3, 5)
        assert_allclose(U.conj().T @ U, np.eye(3), atol=1e-12)
        self.assertAlmostEqual(np.linalg.det(U), 1.0, places=12)
        O = random_orthogonal(4, 5, special=True)
        assert_allclose(O.T @ O, np.eye(4), atol=1e-12)
        self.assertAlmostEqual(np.linalg.det(O), 1.0, places=12)

    def test_induced_map_is_homomorphism(self):
        """induced(UV) = induced(U) induced(V)"""
        rng = np.random.default_rng(21)
        for d in (2, 3):
            basis = gell_mann_basis(d)
            for _ in range(10):
                U = random_special_unitary(d, rng)
                V = random_special_unitary(d, rng)
                assert_allclose(induced_orthogonal(U @ V, basis),
                                induced_orthogonal(U, basis) @ induced_orthogonal(V, basis), atol=1e-10)

    def test_push_forward_preserves_norms(self):
        rng = np.random.default_rng(22)
        for dims in [(2, 2), (2, 3), (2, 2, 2)]:
            rep = extract(random_density(dims, rng))
            os_ = [random_orthogonal(d * d - 1, rng) for d in dims]
            moved = push_forward(rep, os_)
            for label, norm in rep.norms().items():
                self.assertAlmostEqual(moved.norms()[label], norm, places=12)

    def test_conjugation_preserves_spectrum(self):
        rng = np.random.default_rng(23)
        for _ in range(5):
            rho = random_density((2, 2, 2), rng)
            moved = conjugate_local(rho, random_local_unitaries((2, 2, 2), rng))
            assert_allclose(moved.spectrum(), rho.spectrum(), atol=1e-10)

    def test_haar_moments(self):
        """E|U_11|^2 = 1/d on SU(d) and E tr O = 0 on O(n), within 4 sigma over 10^4 samples"""
        rng = np.random.default_rng(24)
        samples = 10000
        d = 3
        weights = np.array([abs(random_special_unitary(d, rng)[0, 0]) ** 2 for _ in range(samples)])
        # |U_11|^2 is Beta(1, d - 1)
        sigma = np.sqrt((d - 1) / (d * d * (d + 1)) / samples)
        self.assertLess(abs(weights.mean() - 1 / d), 4 * sigma)

        n = 4
        traces = np.array([np.trace(random_orthogonal(n, rng)) for _ in range(samples)])
        # tr O has unit variance under Haar measure
        self.assertLess(abs(traces.mean()), 4 / np.sqrt(samples))

    def test_validation(self):
        with self.assertRaises(NotOrthogonal):
            check_orthogonal(2 * np.eye(3))
        with self.assertRaises(NotOrthogonal):
            check_orthogonal(np.diag([1.0, 1.0, -1.0]), special=True)
        with self.assertRaises(NotUnitary):
            LocalUnitaries((2,), (np.array([[1.0, 1.0], [0.0, 1.0]]),))
        with self.assertRaises(DimensionMismatch):
            LocalUnitaries((2, 2), (np.eye(2),))
        with self.assertRaises(DimensionMismatch):
            conjugate_local(random_density((2, 2), 0), LocalUnitaries((2, 3), (np.eye(2), np.eye(3))))

    def test_pair_generation_is_deterministic(self):
        for mode in ("lu", "independent", "sign-flip"):
            a1, b1 = generate_pair((2, 2, 2), 3, mode)
            a2, b2 = generate_pair((2, 2, 2), 3, mode)
            assert_allclose(a1.mat, a2.mat)
            assert_allclose(b1.mat, b2.mat)
        with self.assertRaises(ValueError):
            generate_pair((2, 2), 0, "swap")

    def test_sign_flip_pair_is_valid(self):
        """Both states are PSD and share every tensor norm"""
        a, b = sign_flip_pair((2, 2, 2), 4)
        a.validate()
        b.validate()
        ra, rb = extract(a), extract(b)
        for label, norm in ra.norms().items():
            self.assertAlmostEqual(norm, rb.norms()[label], places=10)


class TestWords(unittest.TestCase):
    """Test word enumeration and trace evaluation"""

    def test_necklace_counts(self):
        """225 cyclic classes of length <= 6 over three letters"""
        self.assertEqual(len(list(enumerate_words(3, 6))), 225)
        self.assertEqual(len(list(necklaces(3, 6))), 130)
        self.assertEqual(len(list(necklaces(2, 4))), 6)

    def test_necklaces_are_canonical(self):
        words = list(necklaces(3, 5))
        self.assertEqual(words, sorted(words))
        self.assertEqual(len(words), len(set(words)))
        for w in words:
            self.assertEqual(cyclic_canonical(w), w)

    def test_cyclic_canonical(self):
        self.assertEqual(cyclic_canonical((2, 0, 1)), (0, 1, 2))
        self.assertEqual(cyclic_canonical((1, 0, 1, 0)), (0, 1, 0, 1))

    def test_trace_of_word(self):
        A = np.array([[1.0, 2.0], [0.0, 3.0]])
        alphabet = Alphabet([A, A.T], ["A", "A^t"])
        self.assertAlmostEqual(trace_of_word(alphabet, (0, 1)), np.trace(A @ A.T))
        with self.assertRaises(ShapeMismatch):
            Alphabet([np.eye(2), np.eye(3)])


class TestSpechtEngine(unittest.TestCase):
    """Test the trace-identity criteria and their ceilings"""

    def setUp(self):
        self.rng = np.random.default_rng(3)

    def test_laffey_ceiling(self):
        self.assertEqual([laffey_ceiling(n) for n in range(2, 7)], [4, 8, 12, 18, 26])

    def test_minimal_r_matches_brute_force(self):
        for m in range(1, 11):
            brute = next(r for r in range(1, 20) if r * (r + 1) // 2 >= m)
            self.assertEqual(minimal_r(m), brute)

    def test_ceilings(self):
        """Two-qubit ceiling 16(3 + 3)^2 = 576"""
        self.assertEqual(jing_ceiling(3, 3, 2), 576)

    def test_specht_orthogonal_similarity(self):
        """A vs O^t A O is consistent over the full Laffey range; A vs A + E11 is distinguished"""
        for _ in range(5):
            A = self.rng.standard_normal((3, 3))
            O = random_orthogonal(3, self.rng)
            report = specht_check(A, O.T @ A @ O)
            self.assertEqual(report.verdict, CONSISTENT)
            self.assertEqual(report.horizon, laffey_ceiling(3))
            self.assertIsNone(report.first_violation)
            E = np.zeros((3, 3))
            E[0, 0] = 1.0
            report = specht_check(A, A + E)
            self.assertEqual(report.verdict, DISTINGUISHED)
            self.assertEqual(len(report.first_violation.word), 1)

    def test_truncated_horizon_is_inconclusive(self):
        A = self.rng.standard_normal((4, 4))
        report = specht_check(A, A, max_len=3)
        self.assertEqual(report.verdict, INCONCLUSIVE)
        self.assertFalse(report.reaches_ceiling)

    def test_thread_count_does_not_change_result(self):
        """First violation and word count are the same with one or four workers"""
        A = self.rng.standard_normal((4, 4))
        O = random_orthogonal(4, self.rng)
        B = O.T @ A @ O
        B = B + 1e-3 * np.outer(O[:, 0], O[:, 1])
        serial = specht_check(A, B, max_len=6, config=CheckConfig(threads=1, chunk_size=2))
        threaded = specht_check(A, B, max_len=6, config=CheckConfig(threads=4, chunk_size=2))
        self.assertEqual(serial.verdict, threaded.verdict)
        self.assertEqual(serial.words_checked, threaded.words_checked)
        self.assertEqual(serial.first_violation, threaded.first_violation)

    def test_full_sweep_records_violations(self):
        A = self.rng.standard_normal((2, 2))
        report = specht_check(A, A + np.eye(2), max_len=3, config=CheckConfig(full_sweep=True))
        self.assertEqual(report.verdict, DISTINGUISHED)
        self.assertGreater(len(report.residuals), 1)
        self.assertEqual(report.first_violation, report.residuals[0])

    def test_jing(self):
        """(O A_i P) is consistent on both sides; a perturbed tuple is distinguished"""
        As = [self.rng.standard_normal((3, 4)) for _ in range(2)]
        O, P = random_orthogonal(3, self.rng), random_orthogonal(4, self.rng)
        Bs = [O @ A @ P for A in As]
        for side in ("left", "right"):
            report = jing_check(As, Bs, max_len=4, side=side)
            self.assertEqual(report.verdict, INCONCLUSIVE)
            self.assertIsNone(report.first_violation)
        Bs[0] = Bs[0] + 0.1
        self.assertEqual(jing_check(As, Bs, max_len=4).verdict, DISTINGUISHED)
        with self.assertRaises(ValueError):
            jing_check(As, Bs, side="middle")

    def test_futorny_two_block(self):
        a1 = [self.rng.standard_normal((3, 4)) for _ in range(2)]
        a2 = [self.rng.standard_normal((3, 1))]
        O, O1, O2 = random_orthogonal(3, self.rng), random_orthogonal(4, self.rng), random_orthogonal(1, self.rng)
        b1 = [O @ A @ O1 for A in a1]
        b2 = [O @ A @ O2 for A in a2]
        report = futorny_two_block_check(a1, a2, b1, b2, max_len=3)
        self.assertIsNone(report.first_violation)
        self.assertEqual(len(report.labels), 3 + 1)
        b2 = [b2[0] * 2]
        self.assertEqual(futorny_two_block_check(a1, a2, b1, b2, max_len=3).verdict, DISTINGUISHED)

    def test_quiver_validation(self):
        with self.assertRaises(MalformedQuiver):
            Quiver(2, [(0, 2)])
        with self.assertRaises(MalformedQuiver):
            Quiver(0, [])
        with self.assertRaises(ShapeMismatch):
            QuiverMatrixRep(parallel_quiver(1), (2, 3), [np.eye(2)])

    def test_oriented_cycles(self):
        """The doubled one-loop quiver has cycles aa, aa*, a*a* of length 2"""
        doubled = loop_quiver().doubled()
        self.assertEqual(list(oriented_cycles(doubled, 2)), [(0, 0), (0, 1), (1, 1)])
        # A single arrow 0 -> 1 has no cycles until it is doubled
        self.assertEqual(list(oriented_cycles(parallel_quiver(1), 2)), [])
        self.assertEqual(list(oriented_cycles(parallel_quiver(1).doubled(), 2)), [(0, 1)])

    def test_loop_quiver_reproduces_specht(self):
        """Same verdict as specht_check at matched horizon and ceiling"""
        q = loop_quiver()
        ceiling = laffey_ceiling(3)
        for i in range(50):
            A = self.rng.standard_normal((3, 3))
            O = random_orthogonal(3, self.rng)
            B = O.T @ A @ O if i % 2 == 0 else A + 0.05 * self.rng.standard_normal((3, 3))
            horizon = ceiling if i % 4 < 2 else 4
            specht = specht_check(A, B, max_len=horizon)
            quiver = quiver_cycle_check(q, QuiverMatrixRep(q, (3,), [A]), QuiverMatrixRep(q, (3,), [B]),
                                        max_len=horizon, ceiling=ceiling)
            self.assertEqual(specht.ceiling, quiver.ceiling)
            self.assertEqual(specht.verdict, quiver.verdict)
            self.assertEqual(specht.words_checked, quiver.words_checked)
            if i % 2 == 0:
                self.assertEqual(quiver.verdict, CONSISTENT if horizon == ceiling else INCONCLUSIVE)
            else:
                self.assertEqual(quiver.verdict, DISTINGUISHED)

    def test_parallel_quiver_reproduces_jing(self):
        """A word of L Gram letters is a cycle of 2L arrows, so horizons and ceilings double"""
        q = parallel_quiver(2)
        for i in range(50):
            As = [self.rng.standard_normal((2, 3)) for _ in range(2)]
            O, P = random_orthogonal(2, self.rng), random_orthogonal(3, self.rng)
            Bs = [O @ A @ P for A in As] if i % 2 == 0 else [A + 0.05 * self.rng.standard_normal((2, 3)) for A in As]
            horizon = 2 if i % 4 < 2 else 3
            # A small ceiling on half the runs exercises the consistent branch too
            ceiling = horizon if i % 4 in (0, 3) else None
            jing = jing_check(As, Bs, max_len=horizon, ceiling=ceiling)
            quiver = quiver_cycle_check(q, QuiverMatrixRep(q, (3, 2), As), QuiverMatrixRep(q, (3, 2), Bs),
                                        max_len=2 * horizon, ceiling=2 * jing.ceiling)
            self.assertEqual(jing.verdict, quiver.verdict)
            if i % 2 == 0:
                self.assertEqual(quiver.verdict, CONSISTENT if ceiling else INCONCLUSIVE)
            else:
                self.assertEqual(quiver.verdict, DISTINGUISHED)

    def test_distinguished_is_monotone_in_horizon(self):
        """Raising the horizon keeps the verdict and the first violation"""
        for _ in range(5):
            A = self.rng.standard_normal((3, 3))
            O = random_orthogonal(3, self.rng)
            B = O.T @ A @ O + 1e-3 * self.rng.standard_normal((3, 3))
            reference = specht_check(A, B, max_len=1)
            self.assertEqual(reference.verdict, DISTINGUISHED)
            for horizon in range(1, laffey_ceiling(3) + 1):
                report = specht_check(A, B, max_len=horizon)
                self.assertEqual(report.verdict, DISTINGUISHED)
                self.assertEqual(report.first_violation, reference.first_violation)
        As = [self.rng.standard_normal((2, 3)) for _ in range(2)]
        Bs = [As[0], As[1] + 0.1]
        reference = jing_check(As, Bs, max_len=1)
        for horizon in range(1, 5):
            self.assertEqual(jing_check(As, Bs, max_len=horizon).first_violation, reference.first_violation)

    def test_ceiling_labels_follow_bound(self):
        """The recorded label names the bound that produced the ceiling"""
        q = loop_quiver()
        A = self.rng.standard_normal((3, 3))
        rep = QuiverMatrixRep(q, (3,), [A])
        # (r + 2)(d_1) = 9 for one loop on a 3-dimensional vertex
        expected = {"square": (81, "((r+2)(d_1+...+d_t))^2"),
                    "pearcy": (162, "2 ((r+2)(d_1+...+d_t))^2"),
                    "laffey": (56, "ceil(2/3 (((r+2)(d_1+...+d_t))^2 + 2))")}
        for bound, (ceiling, label) in expected.items():
            report = quiver_cycle_check(q, rep, rep, max_len=2, config=CheckConfig(bound=bound))
            self.assertEqual(report.ceiling, ceiling)
            self.assertEqual(report.ceiling_label, label)
        self.assertEqual(specht_check(A, A).ceiling_label, bound_label("laffey"))
        self.assertEqual(jing_check([A], [A], max_len=1).ceiling_label, "((r+2)(m+n))^2")
        with self.assertRaises(ValueError):
            bound_label("cubic")

    def test_futorny_quiver_cross_check(self):
        q = futorny_quiver(2, 1)
        a1 = [self.rng.standard_normal((2, 3)) for _ in range(2)]
        a2 = [self.rng.standard_normal((2, 1))]
        O, O1 = random_orthogonal(2, self.rng), random_orthogonal(3, self.rng)
        b1 = [O @ A @ O1 for A in a1]
        b2 = [-(O @ a2[0])]
        direct = futorny_two_block_check(a1, a2, b1, b2, max_len=2)
        rep_a = QuiverMatrixRep(q, (3, 1, 2), a1 + a2)
        rep_b = QuiverMatrixRep(q, (3, 1, 2), b1 + b2)
        via_quiver = quiver_cycle_check(q, rep_a, rep_b, max_len=4)
        self.assertIsNone(direct.first_violation)
        self.assertIsNone(via_quiver.first_violation)


class TestTwoQudit(unittest.TestCase):
    """Test the two-party pipeline"""

    def rep2(self, rho):
        return rep2_from(extract(rho))

    def test_lu_pairs_pass(self):
        """LU-conjugated qubit pairs are consistent-at-horizon with the LU flag set"""
        for seed in range(10):
            rho_a, rho_b = generate_pair((2, 2), seed, "lu")
            report = check_lu_2qubit(self.rep2(rho_a), self.rep2(rho_b))
            self.assertEqual(report.verdict, CONSISTENT_AT_HORIZON)
            self.assertTrue(report.lu)
            self.assertIsNone(report.first_violation)

    def test_sub_ceiling_never_equivalent(self):
        """A clean run below 576 words is consistent-at-horizon, never equivalent"""
        rho_a, rho_b = generate_pair((2, 2), 1, "lu")
        report = check_quasi_lu_2(self.rep2(rho_a), self.rep2(rho_b), max_len=6)
        self.assertEqual(report.ceiling, 576)
        self.assertNotEqual(report.verdict, EQUIVALENT)
        self.assertEqual(report.verdict, CONSISTENT_AT_HORIZON)

    def test_independent_pairs_distinguished(self):
        distinguished = 0
        for seed in range(20):
            rho_a, rho_b = generate_pair((2, 2), seed, "independent")
            report = check_lu_2qubit(self.rep2(rho_a), self.rep2(rho_b))
            if report.verdict == PIPELINE_DISTINGUISHED:
                distinguished += 1
                self.assertFalse(report.lu)
                self.assertIsNotNone(report.reason)
        self.assertGreaterEqual(distinguished, 19)

    def test_flipped_product_states(self):
        """|00> and |11> differ by a local bit flip"""
        a = self.rep2(DensityMatrix.from_pure([2, 2], [1, 0, 0, 0]))
        b = self.rep2(DensityMatrix.from_pure([2, 2], [0, 0, 0, 1]))
        self.assertEqual(check_lu_2qubit(a, b).verdict, CONSISTENT_AT_HORIZON)

    def test_bell_state_is_degenerate(self):
        """Vanishing local tensors make the verdict inconclusive"""
        bell = self.rep2(DensityMatrix.from_pure([2, 2], [1, 0, 0, 1]))
        report = check_quasi_lu_2(bell, bell)
        self.assertEqual(report.verdict, PIPELINE_INCONCLUSIVE)
        self.assertIn("T1", report.degenerate)
        self.assertIsNone(report.lu)

    def test_qutrit_qubit_pair(self):
        rho_a, rho_b = generate_pair((3, 2), 2, "lu")
        report = check_quasi_lu_2(self.rep2(rho_a), self.rep2(rho_b), max_len=4)
        self.assertEqual(report.verdict, CONSISTENT_AT_HORIZON)

    def test_witness_check(self):
        rng = np.random.default_rng(0)
        rho = random_density((2, 2), rng)
        u = random_local_unitaries((2, 2), rng)
        a, b = self.rep2(rho), self.rep2(conjugate_local(rho, u))
        O1, O2 = induced_orthogonals(u).os
        self.assertTrue(so2_witness_check(a, b, O1, O2, special=True))
        self.assertFalse(so2_witness_check(a, b, np.eye(3), np.eye(3)))

    def test_errors(self):
        rho = random_density((2, 3), 0)
        a = self.rep2(rho)
        with self.assertRaises(WrongDimension):
            check_lu_2qubit(a, a)
        with self.assertRaises(WrongArity):
            rep2_from(extract(random_density((2, 2, 2), 0)))
        with self.assertRaises(ShapeMismatch):
            Rep2((2, 2), np.zeros(3), np.zeros(3), np.zeros((3, 2)))


class TestThreeQudit(unittest.TestCase):
    """Test the three-party pipeline and the qubit LU upgrade"""

    def rep3(self, rho):
        return rep3_from(extract(rho))

    def test_battery_shapes(self):
        a = self.rep3(random_density((2, 2, 3), 0))
        battery = build_battery_v1(a)
        self.assertEqual([M.shape for M in battery[:5]], [(3, 24)] * 5)
        self.assertEqual(battery[5].shape, (3, 1))
        battery = build_battery_v2(a)
        self.assertEqual([M.shape for M in battery[:5]], [(3, 24)] * 5)
        assert_allclose(battery[5][:, 0], a.T2)

    def test_battery_equivariance(self):
        """Under LU each battery matrix moves to O A (O' kron O'')^t"""
        rng = np.random.default_rng(5)
        rho = random_density((2, 2, 2), rng)
        u = random_local_unitaries((2, 2, 2), rng)
        O1, O2, O3 = induced_orthogonals(u).os
        a, b = self.rep3(rho), self.rep3(conjugate_local(rho, u))
        for A, B in zip(build_battery_v1(a)[:5], build_battery_v1(b)[:5]):
            assert_allclose(B, O1 @ A @ np.kron(O3, O2).T, atol=1e-10)
        assert_allclose(build_battery_v1(b)[5], O1 @ build_battery_v1(a)[5], atol=1e-10)
        for A, B in zip(build_battery_v2(a)[:5], build_battery_v2(b)[:5]):
            assert_allclose(B, O2 @ A @ np.kron(O3, O1).T, atol=1e-10)
        self.assertTrue(so3_witness_check(a, b, O1, O2, O3, special=True))

    def test_lu_pairs_pass(self):
        for seed in range(5):
            rho_a, rho_b = generate_pair((2, 2, 2), seed, "lu")
            a, b = self.rep3(rho_a), self.rep3(rho_b)
            ledger = qubit_lu_upgrade(a, b, check_quasi_lu_3(a, b, max_len=3))
            self.assertEqual(ledger.verdict, CONSISTENT_AT_HORIZON)
            self.assertTrue(all(n.passed for n in ledger.norms))
            self.assertIsNone(ledger.first_violation)
            self.assertEqual(ledger.ceiling, 4225)
            self.assertTrue(ledger.lu)
            self.assertEqual(ledger.derive_verdict()[0], ledger.verdict)

    def test_independent_pairs_fail_norm_screen(self):
        for seed in range(10):
            rho_a, rho_b = generate_pair((2, 2, 2), seed, "independent")
            a, b = self.rep3(rho_a), self.rep3(rho_b)
            self.assertFalse(all(n.passed for n in necessary_screen_3(a, b)))
            ledger = check_quasi_lu_3(a, b, max_len=2)
            self.assertEqual(ledger.verdict, PIPELINE_DISTINGUISHED)
            self.assertIn("norm mismatch", ledger.reason)

    def test_sign_flip_fails_determinant_check(self):
        """Negating two induced orthogonals flips det(T13) and det(T23)"""
        for seed in range(5):
            rho_a, rho_b = sign_flip_pair((2, 2, 2), seed)
            a, b = self.rep3(rho_a), self.rep3(rho_b)
            ledger = check_quasi_lu_3(a, b, max_len=3)
            self.assertEqual(ledger.verdict, CONSISTENT_AT_HORIZON)
            ledger = qubit_lu_upgrade(a, b, ledger)
            self.assertFalse(ledger.lu)
            unequal = {d["name"] for d in ledger.qubit_extras.determinants if not d["equal"]}
            self.assertEqual(unequal, {"T13", "T23"})

    def test_gram_condition_rank(self):
        """Gram matrices of unfolded outer products have rank one"""
        a = self.rep3(random_density((2, 2, 2), 8))
        for version in (1, 2):
            for info in gram_conditions(a, version):
                self.assertEqual(info.rank, 1)
                self.assertEqual(info.size, 9)
                self.assertFalse(info.invertible)
        ledger = check_quasi_lu_3(a, a, max_len=2)
        self.assertEqual(ledger.sufficiency, "inconclusive: no admissible battery")

    def test_partial_trace_condition_matches_two_party_pipeline(self):
        rho_a, rho_b = generate_pair((2, 2, 2), 6, "lu")
        a, b = self.rep3(rho_a), self.rep3(rho_b)
        ledger = check_quasi_lu_3(a, b, version=1, max_len=3)
        reduced = check_quasi_lu_2(rep2_from(extract(partial_trace(rho_a, 1))),
                                   rep2_from(extract(partial_trace(rho_b, 1))), max_len=3)
        self.assertEqual(ledger.partial_trace.verdict, reduced.verdict)

    def test_reduced_pairs_match_partial_trace(self):
        """Rep3.reduced(k) reads the same tensors as extracting the partial trace"""
        rho = random_density((2, 2, 3), 12)
        a = self.rep3(rho)
        for k in (1, 2, 3):
            direct = rep2_from(extract(partial_trace(rho, k)))
            reduced = a.reduced(k)
            self.assertEqual(reduced.dims, direct.dims)
            for name in ("T1", "T2", "T12"):
                assert_allclose(getattr(reduced, name), getattr(direct, name), atol=1e-12)
        with self.assertRaises(WrongArity):
            a.reduced(4)

    def test_determinant_sign_rule(self):
        """det(s O T P^t) = s det T for O, P in SO(3) and s = +-1"""
        rng = np.random.default_rng(13)
        for _ in range(50):
            T = rng.standard_normal((3, 3))
            O = random_orthogonal(3, rng, special=True)
            P = random_orthogonal(3, rng, special=True)
            for s in (1.0, -1.0):
                self.assertAlmostEqual(np.linalg.det(s * O @ T @ P.T), s * np.linalg.det(T), places=10)

    def test_battery_two_notes(self):
        a = self.rep3(random_density((2, 2, 2), 9))
        ledger = check_quasi_lu_3(a, a, version=2, max_len=2)
        self.assertEqual(ledger.identities.ceiling_label, "25(1 + δ_2 + δ_1δ_3)^2")
        self.assertTrue(any("T2" in note for note in ledger.notes))

    def test_maximally_mixed_is_inconclusive(self):
        a = self.rep3(DensityMatrix.maximally_mixed((2, 2, 2)))
        ledger = qubit_lu_upgrade(a, a, check_quasi_lu_3(a, a, max_len=2))
        self.assertEqual(ledger.verdict, PIPELINE_INCONCLUSIVE)
        self.assertIsNone(ledger.lu)

    def test_errors(self):
        a = self.rep3(random_density((2, 2, 3), 0))
        with self.assertRaises(WrongDimension):
            qubit_lu_upgrade(a, a, check_quasi_lu_3(a, a, max_len=1))
        with self.assertRaises(WrongArity):
            rep3_from(extract(random_density((2, 2), 0)))
        with self.assertRaises(ValueError):
            check_quasi_lu_3(a, a, version=3)


class TestSerialization(unittest.TestCase):
    """Test the JSON codec"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def test_state_round_trip(self):
        rho = random_density((2, 3), 1)
        back = state_from_dict(json.loads(json.dumps(state_to_dict(rho))))
        self.assertEqual(back.dims, rho.dims)
        assert_allclose(back.mat, rho.mat)

    def test_rep_round_trip(self):
        rep = extract(random_density((2, 2, 2), 1))
        back = rep_from_dict(json.loads(dumps(rep_to_dict(rep))))
        for label, T in rep.labelled().items():
            assert_allclose(np.asarray(back[label]), T.array)

    def test_golden_files(self):
        rho = state_from_dict(load_json(os.path.join(GOLDEN, "state_00.json")))
        rep = rep_from_dict(load_json(os.path.join(GOLDEN, "tensors_00.json")))
        for label, T in extract(rho).labelled().items():
            assert_allclose(np.asarray(rep[label]), T.array, atol=1e-12)
        a, b = matrices_from_dict(load_json(os.path.join(GOLDEN, "specht_rotated.json")), "specht")
        self.assertEqual(specht_check(a, b).verdict, CONSISTENT)

    def test_load_state(self):
        rho = load_state(os.path.join(GOLDEN, "state_00.json"))
        self.assertEqual(rho.dims, (2, 2))
        self.assertAlmostEqual(rho.mat[0, 0].real, 1.0)

    def test_non_finite_entries(self):
        """NaN matrices and tensors are rejected when read"""
        data = state_to_dict(random_density((2, 2), 0))
        data["matrix"][0][0] = [float("nan"), 0.0]
        with self.assertRaises(InvalidState):
            state_from_dict(json.loads(json.dumps(data)))
        with self.assertRaises(StateFileError):
            matrices_from_dict({"schema": 1, "a": [[float("nan")]], "b": [[1.0]]}, "specht")
        tensors = rep_to_dict(extract(random_density((2, 2), 0)))
        tensors["tensors"]["T1"][0] = float("inf")
        with self.assertRaises(StateFileError):
            rep_from_dict(tensors)

    def test_malformed_json_reports_position(self):
        path = os.path.join(self.tmp.name, "bad.json")
        with open(path, "w") as f:
            f.write('{"schema": 1,\n "dims": [2, 2')
        with self.assertRaises(StateFileError) as ctx:
            load_json(path)
        self.assertIn("line 2", str(ctx.exception))

    def test_schema_and_shape_errors(self):
        data = state_to_dict(random_density((2, 2), 0))
        with self.assertRaises(StateFileError):
            state_from_dict({**data, "schema": 2})
        with self.assertRaises(StateFileError):
            state_from_dict({**data, "dims": [2, 3]})
        with self.assertRaises(StateFileError):
            state_from_dict({**data, "dims": "2,2"})

    def test_deterministic_output(self):
        """Key order does not change the text or the hash"""
        self.assertEqual(dumps({"b": 1, "a": [1.5, 2]}), dumps({"a": [1.5, 2], "b": 1}))
        self.assertTrue(dumps({"a": 1}).endswith("\n"))
        self.assertEqual(sha256_hex({"b": 1, "a": 2}), sha256_hex({"a": 2, "b": 1}))
        self.assertNotEqual(sha256_hex({"a": 1}), sha256_hex({"a": 2}))


class TestCLI(unittest.TestCase):
    """Test the lu-equiv command line"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.dir, name)

    def test_parse_dims(self):
        self.assertEqual(parse_dims("2,2,3"), (2, 2, 3))
        self.assertEqual(parse_dims("2x3"), (2, 3))
        with self.assertRaises(Exception):
            parse_dims("2,one")
        with self.assertRaises(Exception):
            parse_dims("1,2")

    def test_exit_code_mapping(self):
        self.assertEqual(exit_code_for(StateFileError("x")), 3)
        self.assertEqual(exit_code_for(InvalidState("x")), 4)
        self.assertEqual(exit_code_for(DimensionMismatch("x")), 5)
        self.assertEqual(exit_code_for(WrongArity("x")), 5)

    def test_extract(self):
        """The |00> golden state extracts to the golden tensors"""
        out = self.path("tensors.json")
        code, _ = run_cli("extract", os.path.join(GOLDEN, "state_00.json"), out)
        self.assertEqual(code, 0)
        got = rep_from_dict(load_json(out))
        expected = rep_from_dict(load_json(os.path.join(GOLDEN, "tensors_00.json")))
        for label, T in expected.labelled().items():
            assert_allclose(np.asarray(got[label]), T.array, atol=1e-12)

    def test_extract_round_trip(self):
        state = write_json(self.path("state.json"), state_to_dict(random_density((2, 3), 4)))
        out = self.path("tensors.json")
        self.assertEqual(run_cli("extract", state, out)[0], 0)
        rho = state_from_dict(load_json(state))
        assert_allclose(reconstruct(rep_from_dict(load_json(out))).mat, rho.mat, atol=1e-10)

    def test_error_exit_codes(self):
        bad = self.path("bad.json")
        with open(bad, "w") as f:
            f.write("{not json")
        self.assertEqual(run_cli("extract", bad, self.path("out.json"))[0], 3)

        mat = np.diag([1.5, -0.5, 0.0, 0.0])
        negative = write_json(self.path("neg.json"), {
            "schema": 1, "dims": [2, 2], "matrix": [[[float(x), 0.0] for x in row] for row in mat],
        })
        self.assertEqual(run_cli("extract", negative, self.path("out.json"))[0], 4)

        a = write_json(self.path("a.json"), state_to_dict(random_density((2, 2), 0)))
        b = write_json(self.path("b.json"), state_to_dict(random_density((2, 3), 0)))
        self.assertEqual(run_cli("check2", a, b)[0], 5)

    def test_non_finite_state_exit_code(self):
        """extract refuses NaN and infinite states with exit 4 and writes nothing"""
        for bad_value in (float("nan"), float("inf")):
            mat = [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]
            mat[0][0] = [bad_value, 0.0]
            state = write_json(self.path("nan.json"), {"schema": 1, "dims": [2], "matrix": mat})
            out = self.path("nan_tensors.json")
            self.assertEqual(run_cli("extract", state, out)[0], 4)
            self.assertFalse(os.path.exists(out))
            self.assertEqual(run_cli("check2", state, state)[0], 4)

    def test_check2_identical_files(self):
        state = os.path.join(GOLDEN, "state_00.json")
        report_path = self.path("report.json")
        code, _ = run_cli("check2", state, state, "--json", report_path)
        self.assertEqual(code, 0)
        report = load_json(report_path)
        self.assertEqual(report["verdict"], CONSISTENT_AT_HORIZON)
        self.assertEqual(report["result"]["identities"]["max_residual"], 0.0)
        self.assertEqual(report["config"]["horizon"], 6)
        self.assertEqual(report["config"]["tol"], 1e-8)

    def test_gen_pair_and_check(self):
        """lu pairs pass, independent pairs are distinguished, and exit codes match the report"""
        for mode, expected in (("lu", 0), ("independent", 1)):
            a, b = self.path(f"{mode}_a.json"), self.path(f"{mode}_b.json")
            self.assertEqual(run_cli("gen-pair", "2,2", a, b, "--seed", "5", "--mode", mode)[0], 0)
            report_path = self.path(f"{mode}_report.json")
            code, _ = run_cli("check2", a, b, "--json", report_path)
            self.assertEqual(code, expected)
            report = load_json(report_path)
            self.assertEqual(VERDICT_EXIT_CODES[report["verdict"]], code)
            if mode == "independent":
                self.assertIsNotNone(report["result"]["identities"]["first_violation"])

    def test_gen_pair_is_byte_identical(self):
        paths = [self.path(n) for n in ("a1", "b1", "a2", "b2")]
        run_cli("gen-pair", "2,2,2", paths[0], paths[1], "--seed", "9", "--mode", "sign-flip")
        run_cli("gen-pair", "2,2,2", paths[2], paths[3], "--seed", "9", "--mode", "sign-flip")
        for first, second in ((paths[0], paths[2]), (paths[1], paths[3])):
            with open(first, "rb") as f1, open(second, "rb") as f2:
                self.assertEqual(f1.read(), f2.read())

    def test_reports_are_deterministic(self):
        a, b = self.path("a.json"), self.path("b.json")
        run_cli("gen-pair", "2,2", a, b, "--seed", "1")
        run_cli("check2", a, b, "--json", self.path("r1.json"))
        run_cli("check2", a, b, "--json", self.path("r2.json"))
        with open(self.path("r1.json"), "rb") as f1, open(self.path("r2.json"), "rb") as f2:
            self.assertEqual(f1.read(), f2.read())

    def test_check3(self):
        a, b = self.path("a.json"), self.path("b.json")
        run_cli("gen-pair", "2,2,2", a, b, "--seed", "2", "--mode", "lu")
        report_path = self.path("report.json")
        code, _ = run_cli("check3", a, b, "--horizon", "3", "--json", report_path)
        self.assertEqual(code, 0)
        report = load_json(report_path)
        self.assertEqual(report["verdict"], CONSISTENT_AT_HORIZON)
        self.assertTrue(report["result"]["lu"])
        self.assertEqual(report["result"]["battery"], 1)
        # two-party states are rejected
        c, d = self.path("c.json"), self.path("d.json")
        run_cli("gen-pair", "2,2", c, d)
        self.assertEqual(run_cli("check3", c, d)[0], 5)

    def test_specht_command(self):
        rotated = os.path.join(GOLDEN, "specht_rotated.json")
        self.assertEqual(run_cli("specht", rotated, "--json", self.path("r.json"))[0], 0)
        self.assertEqual(load_json(self.path("r.json"))["verdict"], EQUIVALENT)

        perturbed = write_json(self.path("perturbed.json"), {
            "schema": 1, "a": [[1.0, 2.0], [0.0, 3.0]], "b": [[2.0, 2.0], [0.0, 3.0]],
        })
        self.assertEqual(run_cli("specht", perturbed, "--json", self.path("p.json"))[0], 1)

        loop = os.path.join(GOLDEN, "quiver_loop.json")
        self.assertEqual(run_cli("specht", loop, "--criterion", "quiver", "--horizon", "4")[0], 0)
        futorny = os.path.join(GOLDEN, "futorny_pair.json")
        self.assertEqual(run_cli("specht", futorny, "--criterion", "futorny", "--horizon", "3")[0], 0)

    def test_sweep_with_wandb(self):
        """Sweep logs one entry per trial to wandb"""
        with patch('wandb.init') as mock_init:
            code, _ = run_cli("sweep", "2,2", "--trials", "3", "--mode", "lu", "--wandb",
                              "--json", self.path("sweep.json"))
        self.assertEqual(code, 0)
        mock_init.assert_called_once()
        self.assertEqual(mock_init.call_args.kwargs["project"], "lu-equiv")
        self.assertEqual(mock_init.return_value.log.call_count, 3)
        mock_init.return_value.finish.assert_called_once()
        summary = load_json(self.path("sweep.json"))["result"]
        self.assertEqual(summary["verdicts"], {CONSISTENT_AT_HORIZON: 3})


if __name__ == '__main__':
    unittest.main()
