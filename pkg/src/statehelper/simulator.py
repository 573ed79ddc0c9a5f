"""Monte Carlo validation of helper coding schemes at finite block length.

Random codebooks of auxiliary sequences, jointly-typical randomized encoding,
memoryless action synthesis, and a Bayesian decoding adversary that infers the
codeword from observed play.  Also the deterministic-coding baseline showing
why rate-distortion-style encoding collapses against a state-aware opponent.

Codebooks are nominally 2^ceil(n*rate) i.i.d. sequences.  Small codebooks are
materialized and enumerated exactly.  When the nominal codebook exceeds the
memory cap, trials run on a statistically equivalent reduction: the number of
codewords jointly typical with the realized state sequence is Poisson with a
mean computed exactly from multinomial box probabilities, and those members
are sampled from the conditional law of an i.i.d. codeword given typicality.
When even the typical set is large, competitor codewords enter the adversary
posterior through their exact count and a saddlepoint (Lugannani-Rice) tail
bound on the chance that any of them outweighs the true codeword.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln, ndtr

from .errors import CapacityError, ContractViolationError, InfeasibleRateError
from .game_core import Game, solve_matrix_game
from .rate_value import Scheme

DEFAULT_CODEBOOK_CAP = 1 << 22  # total symbols: count * n
DEFAULT_EPSILON = 0.05
BOX_MATERIALIZE_CAP = 4096  # typical-set members materialized below this
ADVERSARIES = ("oblivious", "decoder", "decoder_with_state")

_LOG2 = np.log(2.0)
_NEG_INF = -np.inf


# ---------------------------------------------------------------------------
# codebooks and typicality


@dataclass(frozen=True)
class Codebook:
    """Materialized codebook of i.i.d. auxiliary sequences."""

    n: int
    rate: float
    sequences: np.ndarray  # (count, n) symbol indices
    seed: int

    @property
    def count(self):
        return self.sequences.shape[0]


def codeword_count(n: int, rate: float) -> int:
    return 1 << int(np.ceil(n * rate - 1e-12))


def build_codebook(scheme: Scheme, n: int, rate: float, seed: int,
                   cap: int = DEFAULT_CODEBOOK_CAP, prior=None) -> Codebook:
    """i.i.d. p_U codebook of 2^ceil(n*rate) sequences, deterministic given seed.

    `prior` is the state distribution defining the marginal p_U; uniform
    states are assumed when omitted.
    """
    if n < 1 or rate < 0:
        raise ContractViolationError("need n >= 1 and rate >= 0")
    count = codeword_count(n, rate)
    if count * n > cap:
        raise CapacityError(
            f"codebook of {count} sequences x {n} symbols exceeds cap {cap}")
    if prior is None:
        prior = np.full(scheme.p_u_given_s.from_size,
                        1.0 / scheme.p_u_given_s.from_size)
    p_u = scheme.p_u(prior)
    rng = np.random.default_rng(seed)
    seqs = rng.choice(scheme.card_u, size=(count, n), p=p_u)
    return Codebook(n=n, rate=float(rate), sequences=seqs.astype(np.int16), seed=seed)


def joint_type_counts(u_seq, s_seq, card_u, n_states):
    """Empirical joint counts over (u, s) pairs."""
    u_seq = np.asarray(u_seq)
    s_seq = np.asarray(s_seq)
    counts = np.zeros((card_u, n_states), dtype=np.int64)
    np.add.at(counts, (u_seq, s_seq), 1)
    return counts


def is_jointly_typical(u_seq, s_seq, target_joint, epsilon):
    """L-infinity closeness of the empirical joint type to the target joint."""
    n = len(s_seq)
    counts = joint_type_counts(u_seq, s_seq, target_joint.shape[0],
                               target_joint.shape[1])
    return np.max(np.abs(counts / n - target_joint)) <= epsilon + 1e-12


class EncoderFailure(Exception):
    """No codeword jointly typical with the state sequence."""


def _target_joint_us(game_prior, scheme):
    # (u, s): prior(s) p(u|s)
    return (scheme.p_u_given_s.rows * np.asarray(game_prior)[:, None]).T


def encode(codebook: Codebook, state_seq, scheme: Scheme, epsilon: float,
           seed: int, prior=None, selection: str = "tilted") -> int:
    """Choose a codeword jointly typical with the state sequence.

    selection "tilted" weights typical codewords by their conditional
    likelihood given the states (so the chosen codeword behaves like an
    i.i.d. p(U|S) draw); "uniform" picks uniformly among typical codewords;
    "first" deterministically takes the lowest index (rate-distortion style).
    Raises EncoderFailure when no codeword qualifies.
    """
    state_seq = np.asarray(state_seq)
    n = codebook.n
    if len(state_seq) != n:
        raise ContractViolationError("state sequence length must equal block length")
    ns = scheme.p_u_given_s.from_size
    if prior is None:
        prior = np.bincount(state_seq, minlength=ns) / n
    target = _target_joint_us(prior, scheme)
    seqs = codebook.sequences
    # joint types for every codeword at once
    flat = seqs * ns + state_seq[None, :]
    counts = np.apply_along_axis(np.bincount, 1, flat, minlength=scheme.card_u * ns)
    counts = counts.reshape(seqs.shape[0], scheme.card_u, ns)
    typical = np.max(np.abs(counts / n - target[None]), axis=(1, 2)) <= epsilon + 1e-12
    idx = np.flatnonzero(typical)
    if idx.size == 0:
        raise EncoderFailure("no jointly typical codeword in the codebook")
    if selection == "first":
        return int(idx[0])
    rng = np.random.default_rng(seed)
    if selection == "uniform":
        return int(rng.choice(idx))
    if selection != "tilted":
        raise ContractViolationError(f"unknown selection rule {selection!r}")
    log_tilt = _log_tilt_table(prior, scheme)  # (u, s)
    w = np.array([log_tilt[seqs[i], state_seq].sum() for i in idx])
    m = w.max()
    if not np.isfinite(m):
        return int(rng.choice(idx))
    w = np.exp(w - m)
    return int(rng.choice(idx, p=w / w.sum()))


def _log_tilt_table(prior, scheme):
    """log p(u|s) - log p_U(u), with -inf where p(u|s) = 0."""
    p_u = scheme.p_u(prior)
    with np.errstate(divide="ignore"):
        return (np.log(scheme.p_u_given_s.rows.T)
                - np.log(np.maximum(p_u, 1e-300))[:, None])


def decode_actions(codeword, scheme: Scheme, seed: int):
    """Synthesize the memoryless action channel p(A|U) along the codeword."""
    codeword = np.asarray(codeword)
    rng = np.random.default_rng(seed)
    rows = scheme.p_a_given_u.rows
    u = rng.random(len(codeword))
    cdf = np.cumsum(rows, axis=1)
    return np.array([int(np.searchsorted(cdf[c], x, side="right"))
                     for c, x in zip(codeword, u)]).clip(0, rows.shape[1] - 1)


# ---------------------------------------------------------------------------
# exact multinomial box probabilities for the typical set


def _box_vectors(n_s, n, p_col, epsilon):
    """All count vectors c (sum n_s) with |c/n - p_col| <= epsilon per entry."""
    card = p_col.size
    lo = np.maximum(np.ceil((p_col - epsilon) * n - 1e-9).astype(int), 0)
    hi = np.minimum(np.floor((p_col + epsilon) * n + 1e-9).astype(int), n_s)
    if np.any(lo > hi):
        return np.zeros((0, card), dtype=int)
    ranges = [range(lo[i], hi[i] + 1) for i in range(card - 1)]
    out = []
    import itertools
    for head in itertools.product(*ranges):
        last = n_s - sum(head)
        if lo[card - 1] <= last <= hi[card - 1]:
            out.append(head + (last,))
    return np.array(out, dtype=int).reshape(-1, card)


def _log_multinomial_pmf(vectors, n_s, p):
    with np.errstate(divide="ignore"):
        logp = np.where(p > 0, np.log(np.maximum(p, 1e-300)), _NEG_INF)
    bad = (vectors[:, p <= 0].sum(axis=1) > 0) if np.any(p <= 0) else \
        np.zeros(len(vectors), dtype=bool)
    ll = (gammaln(n_s + 1) - gammaln(vectors + 1).sum(axis=1)
          + (vectors * np.where(np.isfinite(logp), logp, 0.0)[None, :]).sum(axis=1))
    ll[bad] = _NEG_INF
    return ll


def typicality_log_prob(state_counts, target_joint, epsilon, p_u):
    """ln P(an i.i.d. p_U sequence is jointly typical with a given state sequence).

    Exact: symbols in the positions of each state are i.i.d. p_U, so the
    per-state count vectors are independent multinomials restricted to boxes.
    """
    n = int(state_counts.sum())
    total = 0.0
    for s, n_s in enumerate(state_counts):
        vecs = _box_vectors(int(n_s), n, target_joint[:, s], epsilon)
        if vecs.shape[0] == 0:
            return _NEG_INF
        ll = _log_multinomial_pmf(vecs, int(n_s), p_u)
        m = ll.max()
        if not np.isfinite(m):
            return _NEG_INF
        total += m + np.log(np.exp(ll - m).sum())
    return total


def _sample_box_codeword(rng, state_seq, state_counts, target_joint, epsilon,
                         symbol_dist_per_state):
    """Sample a codeword from i.i.d. per-state symbol laws conditioned on the box.

    symbol_dist_per_state[s] is the per-symbol pmf used in state s (p_U for a
    plain codebook member, p(u|s) for the tilted/true codeword).  Returns None
    if some box is empty or has zero mass under the law.
    """
    n = len(state_seq)
    card_u = target_joint.shape[0]
    out = np.empty(n, dtype=np.int16)
    for s, n_s in enumerate(state_counts):
        vecs = _box_vectors(int(n_s), n, target_joint[:, s], epsilon)
        if vecs.shape[0] == 0:
            return None
        ll = _log_multinomial_pmf(vecs, int(n_s), symbol_dist_per_state[s])
        m = ll.max()
        if not np.isfinite(m):
            return None
        w = np.exp(ll - m)
        vec = vecs[rng.choice(len(vecs), p=w / w.sum())]
        symbols = np.repeat(np.arange(card_u), vec)
        rng.shuffle(symbols)
        out[state_seq == s] = symbols
    return out


# ---------------------------------------------------------------------------
# saddlepoint tail bound for the analytic competitor ensemble


class _CompetitorTail:
    """Tail probabilities for sums of independent per-cell atoms.

    Each cell has a small set of finite atom values with nonnegative weights
    (weights need not sum to 1; the missing mass is a -inf atom that removes
    a draw from contention).  log_tail(counts, threshold) bounds
    ln P(sum of counts[c] draws from cell c >= threshold) with a
    Lugannani-Rice saddlepoint approximation, warm-starting the saddlepoint
    across calls so sweeping a block costs a few Newton steps per position.
    """

    def __init__(self, cell_values, cell_logw):
        width = max((v.size for v in cell_values), default=0)
        c = len(cell_values)
        self.values = np.zeros((c, max(width, 1)))
        self.weights = np.zeros((c, max(width, 1)))
        self.reachable = np.zeros(c, dtype=bool)
        for i, (v, lw) in enumerate(zip(cell_values, cell_logw)):
            if v.size:
                self.values[i, :v.size] = v
                self.weights[i, :v.size] = np.exp(lw)
                self.reachable[i] = True
        self.vmax = self.values.max(axis=1, where=self.weights > 0,
                                    initial=-np.inf)
        self.vmax = np.where(self.reachable, self.vmax, 0.0)
        wsum = self.weights.sum(axis=1)
        self.log_wsum = np.log(np.maximum(wsum, 1e-300))
        at_max = self.weights * (self.values >= self.vmax[:, None] - 1e-12)
        self.log_w_at_max = np.log(np.maximum(at_max.sum(axis=1), 1e-300))
        self.mean_cond = (self.weights * self.values).sum(axis=1) \
            / np.maximum(wsum, 1e-300)
        # centered values keep exp(theta * v) bounded for large theta
        self.centered = self.values - self.vmax[:, None]
        self.theta = 1.0

    def _cgf(self, theta, counts):
        e = self.weights * np.exp(theta * self.centered)
        s0 = np.maximum(e.sum(axis=1), 1e-300)
        s1 = (e * self.values).sum(axis=1) / s0
        s2 = (e * self.values * self.values).sum(axis=1) / s0
        k0 = float(counts @ (theta * self.vmax + np.log(s0)))
        k1 = float(counts @ s1)
        k2 = float(counts @ np.maximum(s2 - s1 * s1, 0.0))
        return k0, k1, k2

    def log_tail(self, counts, threshold):
        counts = np.asarray(counts, dtype=float)
        if np.any((counts > 0) & ~self.reachable):
            return _NEG_INF  # an occupied cell no competitor can ever match
        if counts.sum() == 0:
            return 0.0 if threshold <= 0 else _NEG_INF
        sup = float(counts @ self.vmax)
        log_survival = float(counts @ self.log_wsum)
        if threshold > sup + 1e-9:
            return _NEG_INF
        if threshold >= sup - 1e-9:
            # mass concentrated exactly at the supremum
            return float(counts @ self.log_w_at_max)
        if threshold <= float(counts @ self.mean_cond):
            return log_survival  # bulk regime: bound by survival probability
        theta = min(max(self.theta, 1e-6), 200.0)
        lo, hi = 0.0, np.inf
        k0 = k1 = k2 = 0.0
        for _ in range(60):
            k0, k1, k2 = self._cgf(theta, counts)
            if abs(k1 - threshold) <= 1e-9 * (1.0 + abs(threshold)):
                break
            if k1 < threshold:
                lo = theta
            else:
                hi = theta
            if k2 > 1e-300:
                step = theta + (threshold - k1) / k2
            else:
                step = np.inf
            if lo < step < hi:
                theta = step
            elif np.isinf(hi):
                theta = max(2.0 * theta, 1e-3)
                if theta > 400.0:
                    return float(counts @ self.log_w_at_max)
            else:
                theta = 0.5 * (lo + hi)
        self.theta = theta
        arg = 2.0 * (theta * threshold - k0)
        if arg <= 0 or k2 <= 0:
            return log_survival
        w_lr = np.sqrt(arg)
        u_lr = theta * np.sqrt(k2)
        if u_lr < 1e-8 or w_lr < 1e-8:
            return min(log_survival, np.log(0.5))
        tail = ndtr(-w_lr) + np.exp(-0.5 * w_lr * w_lr) / np.sqrt(2 * np.pi) \
            * (1.0 / u_lr - 1.0 / w_lr)
        tail = min(max(tail, 1e-300), 1.0)
        return min(np.log(tail), log_survival)


def _saddlepoint_log_tail(atom_values, atom_logw, cell_counts, threshold):
    """One-off wrapper over _CompetitorTail for a single evaluation."""
    return _CompetitorTail(list(atom_values), list(atom_logw)).log_tail(
        np.asarray(cell_counts, dtype=float), threshold)


# ---------------------------------------------------------------------------
# adversaries


class ObliviousAdversary:
    """Plays the minimax mix of the relevant averaged game every iteration."""

    def __init__(self, game: Game, sees_state: bool, rng):
        self.sees_state = sees_state
        self.rng = rng
        if sees_state:
            self.mixes = np.stack([
                solve_matrix_game(game.state_matrix(s)).strategy_b.rows[0]
                for s in range(game.n_states)])
        else:
            self.mix = solve_matrix_game(game.averaged_matrix()).strategy_b.rows[0]

    def play_block(self, state_seq):
        n = len(state_seq)
        out = np.empty(n, dtype=np.int64)
        for t in range(n):
            p = self.mixes[state_seq[t]] if self.sees_state else self.mix
            out[t] = self.rng.choice(p.size, p=p)
        return out


def _best_response_to_joint(q_sa, payoff):
    """argmin_b sum_{s,a} q(s,a) payoff(a,b,s)."""
    vals = np.einsum("sa,abs->b", q_sa, payoff)
    return int(np.argmin(vals))


class ExactDecoderAdversary:
    """Exact Bayesian posterior over an enumerated set of candidate codewords.

    prior_logw encodes what the adversary knows about the encoder's selection
    rule; likelihoods accumulate observed actions (and states when they are
    only revealed causally).
    """

    def __init__(self, game, scheme, candidates, prior_logw, sees_state_seq):
        self.game = game
        self.scheme = scheme
        self.cands = candidates  # (m, n)
        self.logw = np.array(prior_logw, dtype=float)
        self.sees_state_seq = sees_state_seq
        with np.errstate(divide="ignore"):
            self.log_pa = np.log(scheme.p_a_given_u.rows)  # (u, a)
        self.p_a_rows = scheme.p_a_given_u.rows
        self.p_s_rows = None  # filled by caller for causal-state adversaries

    def _posterior(self):
        m = self.logw.max()
        if not np.isfinite(m):
            return None
        w = np.exp(self.logw - m)
        return w / w.sum()

    def act(self, t, s_t, joint_sa, p_s_given_u):
        post = self._posterior()
        payoff = self.game.payoff
        if post is None:
            # all candidates ruled out: fall back to the scheme's marginal play
            q = joint_sa.copy()
        else:
            u_t = self.cands[:, t]
            pa = (post[:, None] * self.p_a_rows[u_t]).sum(axis=0)
            if self.sees_state_seq:
                q = np.zeros_like(joint_sa)
                q[s_t] = pa
            else:
                q = np.einsum("i,is,ia->sa", post, p_s_given_u[u_t],
                              self.p_a_rows[u_t])
        if self.sees_state_seq:
            mask = np.zeros_like(q)
            mask[s_t] = q[s_t] if q[s_t].sum() > 0 else joint_sa[s_t]
            q = mask
        return _best_response_to_joint(q, payoff)

    def observe(self, t, s_t, a_t, log_ps_given_u):
        u_t = self.cands[:, t]
        self.logw = self.logw + self.log_pa[u_t, a_t]
        if not self.sees_state_seq:
            self.logw = self.logw + log_ps_given_u[u_t, s_t]

    def decoded_true(self, true_idx):
        if true_idx is None or not np.isfinite(self.logw.max()):
            return False
        order = np.argsort(self.logw)
        best = order[-1]
        if best != true_idx:
            return False
        if len(self.logw) == 1:
            return True
        return self.logw[best] > self.logw[order[-2]]


# ---------------------------------------------------------------------------
# match configuration and results


@dataclass(frozen=True)
class MatchConfig:
    n: int
    trials: int
    epsilon: float = DEFAULT_EPSILON
    adversary: str = "decoder_with_state"
    b_knows_state: bool = True
    seed: int = 0
    codebook_cap: int = DEFAULT_CODEBOOK_CAP
    box_cap: int = BOX_MATERIALIZE_CAP
    selection: str = "tilted"

    def __post_init__(self):
        if self.n < 1 or self.trials < 1 or self.epsilon <= 0:
            raise ContractViolationError("need n >= 1, trials >= 1, epsilon > 0")
        if self.adversary not in ADVERSARIES:
            raise ContractViolationError(f"unknown adversary {self.adversary!r}")


@dataclass(frozen=True)
class MatchResult:
    per_iteration_payoff: np.ndarray
    decode_success: np.ndarray
    encoder_failure_rate: float
    mean_payoff: float

    def to_csv(self, stream=None) -> str:
        buf = stream or io.StringIO()
        buf.write("k,mean_payoff_at_k,decode_success_at_k\n")
        for k, (p, d) in enumerate(zip(self.per_iteration_payoff,
                                       self.decode_success), start=1):
            buf.write(f"{k},{p:.17g},{d:.17g}\n")
        return buf.getvalue() if stream is None else ""


# ---------------------------------------------------------------------------
# the match driver


class _SchemeTables:
    """Per-scheme log tables shared across trials."""

    def __init__(self, game: Game, scheme: Scheme):
        self.game = game
        self.scheme = scheme
        self.prior = game.prior
        self.joint = scheme.joint(game.prior).mass  # (s, u, a)
        self.joint_sa = self.joint.sum(axis=1)  # (s, a)
        self.p_u = scheme.p_u(game.prior)
        self.p_a = self.joint_sa.sum(axis=0)
        self.p_a_given_s = np.divide(
            self.joint_sa, np.maximum(self.joint_sa.sum(axis=1, keepdims=True), 1e-300))
        self.p_s_given_u = scheme.p_s_given_u(game.prior).rows  # (u, s)
        self.target_joint_us = _target_joint_us(game.prior, scheme)  # (u, s)
        with np.errstate(divide="ignore"):
            self.log_pa_u = np.log(scheme.p_a_given_u.rows)  # (u, a)
            self.log_ps_u = np.log(self.p_s_given_u)  # (u, s)
            self.log_tilt = _log_tilt_table(game.prior, scheme)  # (u, s)
            self.log_pa_s = np.log(np.maximum(self.p_a_given_s, 1e-300))
            self.log_joint_sa = np.log(np.maximum(self.joint_sa, 1e-300))


def _empirical_target(tables, state_counts, n):
    """Typicality target p_hat(s) p(u|s) centered on the realized state type.

    Centering on the empirical type rather than the design prior keeps the
    per-state count boxes nonempty for every realized state sequence, so
    encoder failures reflect covering (rate vs I(U;S)) rather than ordinary
    binomial drift of the state frequencies.
    """
    emp = state_counts / n
    return (tables.scheme.p_u_given_s.rows * emp[:, None]).T


def _trial_rng(master_seed, trial):
    return np.random.default_rng([int(master_seed), int(trial)])


def _payoffs_for(game, s_seq, a_seq, b_seq):
    return game.payoff[a_seq, b_seq, s_seq]


def _fallback_actions(tables, rng, n):
    return rng.choice(tables.p_a.size, size=n, p=tables.p_a)


def _analytic_cells(tables, s_seq, a_seq, informed):
    """Per-position competitor atom values: list over t of (values, logweights)."""
    # cells keyed by (s, a) for the observed prefix and s alone for the suffix
    nu = tables.p_u.size
    with np.errstate(divide="ignore"):
        log_pu = np.log(np.maximum(tables.p_u, 1e-300))
    cells = {}
    for s in range(tables.prior.size):
        tilt = tables.log_tilt[:, s]
        if informed:
            cells[("suffix", s)] = (tilt.copy(), log_pu.copy())
        for a in range(tables.p_a.size):
            if informed:
                vals = tilt + tables.log_pa_u[:, a]
            else:
                vals = tables.log_ps_u[:, s] + tables.log_pa_u[:, a]
            cells[("prefix", s, a)] = (vals, log_pu.copy())
    out = {}
    for key, (vals, lw) in cells.items():
        finite = np.isfinite(vals) & np.isfinite(lw)
        out[key] = (vals[finite], lw[finite])
    return out


def _run_analytic_trial(tables, cfg, rate, rng, informed, selection):
    """One trial where competitors are handled through count + tail bound."""
    game, scheme = tables.game, tables.scheme
    n = cfg.n
    s_seq = rng.choice(tables.prior.size, size=n, p=tables.prior)
    state_counts = np.bincount(s_seq, minlength=tables.prior.size)
    target = _empirical_target(tables, state_counts, n)
    log_n_codewords = int(np.ceil(n * rate - 1e-12)) * _LOG2
    log_ptyp = typicality_log_prob(state_counts, target, cfg.epsilon, tables.p_u)
    log_lambda = log_n_codewords + log_ptyp
    lam = np.exp(min(log_lambda, 700.0)) if np.isfinite(log_ptyp) else 0.0
    # encoder fails when the Poisson(lambda) typical-set count is zero
    if rng.random() < np.exp(-min(lam, 700.0)):
        a_seq = _fallback_actions(tables, rng, n)
        b_seq = _marginal_responses(tables, s_seq, informed)
        pay = _payoffs_for(game, s_seq, a_seq, b_seq)
        return pay, np.zeros(n), True
    symbol_laws = (scheme.p_u_given_s.rows if selection == "tilted"
                   else np.tile(tables.p_u, (tables.prior.size, 1)))
    u_true = _sample_box_codeword(rng, s_seq, state_counts, target,
                                  cfg.epsilon, symbol_laws)
    if u_true is None:
        a_seq = _fallback_actions(tables, rng, n)
        b_seq = _marginal_responses(tables, s_seq, informed)
        pay = _payoffs_for(game, s_seq, a_seq, b_seq)
        return pay, np.zeros(n), True
    a_seq = decode_actions(u_true, scheme, rng.integers(1 << 62))

    # true-codeword log weight per prefix length, for the decode tail bound
    lik_steps = tables.log_pa_u[u_true, a_seq] if informed else \
        tables.log_ps_u[u_true, s_seq] + tables.log_pa_u[u_true, a_seq]
    lik_cum = np.concatenate([[0.0], np.cumsum(lik_steps)])
    tilt_total = tables.log_tilt[u_true, s_seq].sum() if informed else 0.0

    decode = _analytic_decode_curve(tables, cfg, s_seq, a_seq, u_true, informed,
                                    tilt_total, lik_cum, log_n_codewords)
    # Until the adversary has decoded, its posterior predictive is dominated
    # by competitor codewords uncorrelated with the truth, so its play is a
    # best response to the scheme marginal; once decoded it exploits the
    # codeword.  Blend the two payoffs by the decode probability so far.
    b_marg = _marginal_responses(tables, s_seq, informed)
    b_dec = _decoded_responses(tables, s_seq, u_true, informed)
    pay_marg = _payoffs_for(game, s_seq, a_seq, b_marg)
    pay_dec = _payoffs_for(game, s_seq, a_seq, b_dec)
    shift = np.concatenate([[0.0], decode[:-1]])
    pay = (1.0 - shift) * pay_marg + shift * pay_dec
    return pay, decode, False


def _marginal_responses(tables, s_seq, informed):
    """B's best responses given no codeword information."""
    payoff = tables.game.payoff
    if informed:
        br = np.empty(tables.prior.size, dtype=np.int64)
        for s in range(tables.prior.size):
            q = np.zeros_like(tables.joint_sa)
            q[s] = tables.p_a_given_s[s]
            br[s] = _best_response_to_joint(q, payoff)
        return br[s_seq]
    b = _best_response_to_joint(tables.joint_sa, payoff)
    return np.full(len(s_seq), b, dtype=np.int64)


def _decoded_responses(tables, s_seq, u_true, informed):
    """B's best responses after identifying the codeword."""
    payoff = tables.game.payoff
    pa = tables.scheme.p_a_given_u.rows
    if informed:
        nu = tables.p_u.size
        br = np.empty((tables.prior.size, nu), dtype=np.int64)
        for s in range(tables.prior.size):
            for u in range(nu):
                q = np.zeros_like(tables.joint_sa)
                q[s] = pa[u]
                br[s, u] = _best_response_to_joint(q, payoff)
        return br[s_seq, u_true]
    br = np.array([_best_response_to_joint(
        np.outer(tables.p_s_given_u[u], pa[u]), payoff)
        for u in range(tables.p_u.size)], dtype=np.int64)
    return br[u_true]


def _analytic_decode_curve(tables, cfg, s_seq, a_seq, u_true, informed,
                           tilt_total, lik_cum, log_n_codewords):
    n = cfg.n
    ns, na = tables.prior.size, tables.p_a.size
    cells = _analytic_cells(tables, s_seq, a_seq, informed)
    # fixed cell order: suffix cells (informed only) then prefix (s, a) cells
    keys = ([("suffix", s) for s in range(ns)] if informed else []) \
        + [("prefix", s, a) for s in range(ns) for a in range(na)]
    tail = _CompetitorTail([cells[k][0] for k in keys],
                           [cells[k][1] for k in keys])
    index = {key: i for i, key in enumerate(keys)}
    counts = np.zeros(len(keys))
    if informed:
        for s, m in enumerate(np.bincount(s_seq, minlength=ns)):
            counts[index[("suffix", s)]] = m
    decode = np.zeros(n)
    for k in range(1, n + 1):
        s_t, a_t = s_seq[k - 1], a_seq[k - 1]
        counts[index[("prefix", s_t, a_t)]] += 1
        if informed:
            counts[index[("suffix", s_t)]] -= 1
        log_beats = log_n_codewords + tail.log_tail(
            counts, tilt_total + lik_cum[k])
        decode[k - 1] = 0.0 if log_beats > 700 else np.exp(-np.exp(log_beats))
    return decode


def _materialize_box_members(tables, cfg, rng, s_seq, state_counts, target, m):
    members = []
    p_u_rows = np.tile(tables.p_u, (tables.prior.size, 1))
    for _ in range(m):
        cw = _sample_box_codeword(rng, s_seq, state_counts, target,
                                  cfg.epsilon, p_u_rows)
        if cw is None:
            return None
        members.append(cw)
    return np.stack(members)


def _run_conditional_exact_trial(tables, cfg, rate, rng, selection):
    """Informed-adversary trial enumerating only the typical-set members."""
    game, scheme = tables.game, tables.scheme
    n = cfg.n
    s_seq = rng.choice(tables.prior.size, size=n, p=tables.prior)
    state_counts = np.bincount(s_seq, minlength=tables.prior.size)
    target = _empirical_target(tables, state_counts, n)
    log_n_codewords = int(np.ceil(n * rate - 1e-12)) * _LOG2
    log_ptyp = typicality_log_prob(state_counts, target, cfg.epsilon, tables.p_u)
    lam = np.exp(min(log_n_codewords + log_ptyp, 700)) if np.isfinite(log_ptyp) else 0.0
    m = int(rng.poisson(min(lam, 1e9)))
    if m == 0:
        a_seq = _fallback_actions(tables, rng, n)
        b_seq = _marginal_responses(tables, s_seq, True)
        return _payoffs_for(game, s_seq, a_seq, b_seq), np.zeros(n), True
    if selection == "first":
        # the deterministic encoder always sends the lowest-index typical
        # codeword, so a protocol-aware state-informed adversary reproduces
        # the choice and knows the codeword before play starts
        u_true = _sample_box_codeword(
            rng, s_seq, state_counts, target, cfg.epsilon,
            np.tile(tables.p_u, (tables.prior.size, 1)))
        if u_true is None:
            a_seq = _fallback_actions(tables, rng, n)
            b_seq = _marginal_responses(tables, s_seq, True)
            return _payoffs_for(game, s_seq, a_seq, b_seq), np.zeros(n), True
        a_seq = decode_actions(u_true, scheme, rng.integers(1 << 62))
        b_seq = _decoded_responses(tables, s_seq, u_true, True)
        return _payoffs_for(game, s_seq, a_seq, b_seq), np.ones(n), False
    if m > cfg.box_cap:
        return None  # caller falls back to the analytic treatment
    members = _materialize_box_members(tables, cfg, rng, s_seq, state_counts,
                                       target, m)
    if members is None:
        a_seq = _fallback_actions(tables, rng, n)
        b_seq = _marginal_responses(tables, s_seq, True)
        return _payoffs_for(game, s_seq, a_seq, b_seq), np.zeros(n), True
    tilt_w = tables.log_tilt[members, s_seq[None, :]].sum(axis=1)
    if selection == "tilted":
        w = np.exp(tilt_w - tilt_w.max())
        true_idx = int(rng.choice(m, p=w / w.sum()))
        prior_logw = tilt_w
    elif selection == "uniform":
        true_idx = int(rng.integers(m))
        prior_logw = np.zeros(m)
    else:  # first: deterministic encoder, protocol-aware adversary
        true_idx = 0
        prior_logw = np.full(m, _NEG_INF)
        prior_logw[0] = 0.0
    u_true = members[true_idx]
    a_seq = decode_actions(u_true, scheme, rng.integers(1 << 62))
    adv = ExactDecoderAdversary(game, scheme, members, prior_logw,
                                sees_state_seq=True)
    b_seq = np.empty(n, dtype=np.int64)
    decode = np.zeros(n)
    for t in range(n):
        b_seq[t] = adv.act(t, s_seq[t], tables.joint_sa, tables.p_s_given_u)
        adv.observe(t, s_seq[t], a_seq[t], tables.log_ps_u)
        decode[t] = 1.0 if adv.decoded_true(true_idx) else 0.0
    return _payoffs_for(game, s_seq, a_seq, b_seq), decode, False


def _run_exact_trial(tables, cfg, rate, rng, selection, adversary):
    """Full materialized-codebook trial."""
    game, scheme = tables.game, tables.scheme
    n = cfg.n
    s_seq = rng.choice(tables.prior.size, size=n, p=tables.prior)
    codebook = build_codebook(scheme, n, rate, int(rng.integers(1 << 62)),
                              cap=cfg.codebook_cap, prior=tables.prior)
    try:
        true_idx = encode(codebook, s_seq, scheme, cfg.epsilon,
                          int(rng.integers(1 << 62)), selection=selection)
        failed = False
    except EncoderFailure:
        true_idx, failed = None, True
    if failed:
        a_seq = _fallback_actions(tables, rng, n)
    else:
        a_seq = decode_actions(codebook.sequences[true_idx], scheme,
                               int(rng.integers(1 << 62)))
    if adversary == "oblivious":
        obl = ObliviousAdversary(game, cfg.b_knows_state, rng)
        b_seq = obl.play_block(s_seq)
        return _payoffs_for(game, s_seq, a_seq, b_seq), np.zeros(n), failed
    informed = adversary == "decoder_with_state"
    if informed:
        emp_prior = np.bincount(s_seq, minlength=tables.prior.size) / n
        log_tilt = _log_tilt_table(emp_prior, scheme)
        tilt_w = log_tilt[codebook.sequences, s_seq[None, :]].sum(axis=1)
        target = _target_joint_us(emp_prior, scheme)
        flat = codebook.sequences * tables.prior.size + s_seq[None, :]
        counts = np.apply_along_axis(np.bincount, 1, flat,
                                     minlength=scheme.card_u * tables.prior.size)
        counts = counts.reshape(codebook.count, scheme.card_u, tables.prior.size)
        typical = np.max(np.abs(counts / n - target[None]), axis=(1, 2)) \
            <= cfg.epsilon + 1e-12
        if selection == "tilted":
            prior_logw = np.where(typical, tilt_w, _NEG_INF)
        elif selection == "uniform":
            prior_logw = np.where(typical, 0.0, _NEG_INF)
        else:  # first
            prior_logw = np.full(codebook.count, _NEG_INF)
            idx = np.flatnonzero(typical)
            if idx.size:
                prior_logw[idx[0]] = 0.0
    else:
        prior_logw = np.zeros(codebook.count)
    adv = ExactDecoderAdversary(game, scheme, codebook.sequences, prior_logw,
                                sees_state_seq=informed)
    b_seq = np.empty(n, dtype=np.int64)
    decode = np.zeros(n)
    for t in range(n):
        b_seq[t] = adv.act(t, s_seq[t], tables.joint_sa, tables.p_s_given_u)
        adv.observe(t, s_seq[t], a_seq[t], tables.log_ps_u)
        decode[t] = 1.0 if (not failed and adv.decoded_true(true_idx)) else 0.0
    return _payoffs_for(game, s_seq, a_seq, b_seq), decode, failed


def adversary_play(model: str, past_states, past_actions, codebook: Codebook,
                   scheme: Scheme, game: Game, iteration: int,
                   state_seq=None, epsilon: float = DEFAULT_EPSILON,
                   selection: str = "tilted", seed: int = 0):
    """One adversary action at `iteration` given the visible history.

    Stateless convenience wrapper over the Bayesian decoder machinery: the
    posterior is recomputed from the full history each call.  `state_seq`
    supplies the whole block for the state-aware model; the plain decoder sees
    only past states causally.
    """
    if model not in ADVERSARIES:
        raise ContractViolationError(f"unknown adversary {model!r}")
    tables = _SchemeTables(game, scheme)
    rng = np.random.default_rng(seed)
    if model == "oblivious":
        obl = ObliviousAdversary(game, state_seq is not None, rng)
        if state_seq is not None:
            return obl.play_block(np.asarray(state_seq)[iteration:iteration + 1])[0]
        mix = obl.mix
        return int(rng.choice(mix.size, p=mix))
    informed = model == "decoder_with_state"
    if informed and state_seq is None:
        raise ContractViolationError("decoder_with_state needs the full state sequence")
    if informed:
        s_full = np.asarray(state_seq)
        tilt_w = tables.log_tilt[codebook.sequences, s_full[None, :]].sum(axis=1)
        flat = codebook.sequences * tables.prior.size + s_full[None, :]
        counts = np.apply_along_axis(np.bincount, 1, flat,
                                     minlength=scheme.card_u * tables.prior.size)
        counts = counts.reshape(codebook.count, scheme.card_u, tables.prior.size)
        typical = np.max(np.abs(counts / codebook.n - tables.target_joint_us[None]),
                         axis=(1, 2)) <= epsilon + 1e-12
        prior_logw = np.where(typical, tilt_w if selection == "tilted" else 0.0,
                              _NEG_INF)
    else:
        prior_logw = np.zeros(codebook.count)
    adv = ExactDecoderAdversary(game, scheme, codebook.sequences, prior_logw,
                                sees_state_seq=informed)
    past_states = np.asarray(past_states, dtype=int)
    past_actions = np.asarray(past_actions, dtype=int)
    for t in range(iteration):
        adv.observe(t, past_states[t], past_actions[t], tables.log_ps_u)
    s_t = int(state_seq[iteration]) if state_seq is not None else 0
    return adv.act(iteration, s_t, tables.joint_sa, tables.p_s_given_u)


def run_match(game: Game, scheme: Scheme, rate: float, config: MatchConfig
              ) -> MatchResult:
    """Simulate independent blocks of the coded game and aggregate statistics."""
    if scheme.p_u_given_s.from_size != game.n_states or \
            scheme.p_a_given_u.to_size != game.n_actions_a:
        raise ContractViolationError("scheme dimensions do not match game")
    tables = _SchemeTables(game, scheme)
    n, trials = config.n, config.trials
    adversary = config.adversary
    if adversary == "decoder" and config.b_knows_state:
        adversary = "decoder_with_state"
    count = codeword_count(n, rate)
    exact = count * n <= config.codebook_cap
    pay_sum = np.zeros(n)
    dec_sum = np.zeros(n)
    failures = 0
    for trial in range(trials):
        rng = _trial_rng(config.seed, trial)
        if exact:
            pay, dec, failed = _run_exact_trial(tables, config, rate, rng,
                                                config.selection, adversary)
        elif adversary == "decoder_with_state":
            out = _run_conditional_exact_trial(tables, config, rate, rng,
                                               config.selection)
            if out is None:
                rng = _trial_rng(config.seed, trial)  # replay with same stream
                pay, dec, failed = _run_analytic_trial(
                    tables, config, rate, rng, True, config.selection)
            else:
                pay, dec, failed = out
        elif adversary == "oblivious":
            pay, dec, failed = _run_virtual_oblivious_trial(
                tables, config, rate, rng, config.selection)
        else:
            pay, dec, failed = _run_analytic_trial(tables, config, rate, rng,
                                                   False, config.selection)
        pay_sum += pay
        dec_sum += dec
        failures += int(failed)
    per_iter = pay_sum / trials
    return MatchResult(
        per_iteration_payoff=per_iter,
        decode_success=dec_sum / trials,
        encoder_failure_rate=failures / trials,
        mean_payoff=float(per_iter.mean()),
    )


def _run_virtual_oblivious_trial(tables, cfg, rate, rng, selection):
    game, scheme = tables.game, tables.scheme
    n = cfg.n
    s_seq = rng.choice(tables.prior.size, size=n, p=tables.prior)
    state_counts = np.bincount(s_seq, minlength=tables.prior.size)
    target = _empirical_target(tables, state_counts, n)
    log_n_codewords = int(np.ceil(n * rate - 1e-12)) * _LOG2
    log_ptyp = typicality_log_prob(state_counts, target, cfg.epsilon, tables.p_u)
    lam = np.exp(min(log_n_codewords + log_ptyp, 700)) if np.isfinite(log_ptyp) else 0.0
    failed = rng.poisson(min(lam, 1e9)) == 0
    if failed:
        a_seq = _fallback_actions(tables, rng, n)
    else:
        laws = (scheme.p_u_given_s.rows if selection == "tilted"
                else np.tile(tables.p_u, (tables.prior.size, 1)))
        u_true = _sample_box_codeword(rng, s_seq, state_counts, target,
                                      cfg.epsilon, laws)
        if u_true is None:
            a_seq, failed = _fallback_actions(tables, rng, n), True
        else:
            a_seq = decode_actions(u_true, scheme, rng.integers(1 << 62))
    obl = ObliviousAdversary(game, cfg.b_knows_state, rng)
    b_seq = obl.play_block(s_seq)
    return _payoffs_for(game, s_seq, a_seq, b_seq), np.zeros(n), failed


def optimal_state_strategy(game: Game):
    """Per-state minimax mixes for Player A (the full-information strategy)."""
    return np.stack([solve_matrix_game(game.state_matrix(s)).strategy_a.rows[0]
                     for s in range(game.n_states)])


def deterministic_baseline(game: Game, rate: float, n: int, trials: int,
                           seed: int, adversary: str = "decoder_with_state",
                           epsilon: float = DEFAULT_EPSILON) -> MatchResult:
    """Rate-distortion-style coding demo: actions a deterministic function of states.

    Codewords are action sequences (U = A) and the encoder deterministically
    picks the first jointly typical one, so a protocol-aware opponent who sees
    the states can reproduce the choice and anticipate every action.  The
    target p(A|S) is the per-state minimax strategy, which must fit the rate.
    """
    from .game_core import ConditionalDistribution
    per_state = optimal_state_strategy(game)
    scheme = Scheme(ConditionalDistribution(per_state),
                    ConditionalDistribution(np.eye(game.n_actions_a)))
    from .info_measures import JointDistribution, mutual_information
    joint = scheme.joint(game.prior)
    i_sa = mutual_information(JointDistribution(joint.marginal((0, 2))), (0,), (1,))
    if rate < i_sa - 1e-9:
        raise InfeasibleRateError(
            f"rate {rate} below I(S;A)={i_sa:.4f} of the optimal strategy channel")
    cfg = MatchConfig(n=n, trials=trials, epsilon=epsilon, adversary=adversary,
                      b_knows_state=(adversary != "decoder"), seed=seed,
                      selection="first")
    return run_match(game, scheme, rate, cfg)
