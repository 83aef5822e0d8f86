"""
拉丁截线 - 加权拉丁截线、带标记位的部分拉丁截线、f(β,q)/g(β) 数值表
"""

import io
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy import optimize

from core.config import config
from core.events import AtomicPermEvent
from core.exceptions import (
    InvalidParameter, InvariantViolation, NoRoot, OutOfRange, ParseError, SupercriticalColors,
)
from core.models import ClusterWeights, ColorMatrix, PartialLatinResult
from core.rng import stream
from engines.swap_engine import run_swapping

logger = logging.getLogger(__name__)

# Δ ≤ (27/256)·n 时 LLL 保证存在拉丁截线
CRITICAL_RATIO = 27.0 / 256.0

TABLE_BETAS = tuple(round(0.11 + 0.01 * i, 2) for i in range(15))

_GRID_POINTS = 256


class WeightedTransversal(BaseModel):
    """Swapping 算法给出的拉丁截线及其权重"""
    cells: Tuple[Tuple[int, int], ...] = Field(..., description="(x, π(x))")
    weight: float = Field(..., description="Σ w(x, π(x))")
    terminated: bool = Field(..., description="是否终止")
    steps: int = Field(..., description="重采样次数")


class TableRow(BaseModel):
    """数值表的一行"""
    beta: float = Field(..., description="β")
    g: float = Field(..., description="g(β)")
    uniform: float = Field(..., description="(1-e^{-β})/β")
    subset_resampling: float = Field(..., description="1/2 + ∛(27/(2048β))")
    q_star: float = Field(..., description="取得 g(β) 的 q")


# ==================== 实例 ====================

def latin_instance(m: ColorMatrix, mark_prob: Optional[float] = None) -> List[AtomicPermEvent]:
    """同色且行列互异的每对单元格一个坏事件 π(x_1)=y_1 ∧ π(x_2)=y_2"""
    cells_by_color: Dict[int, List[Tuple[int, int]]] = {}
    for x, row in enumerate(m.colors):
        for y, c in enumerate(row):
            cells_by_color.setdefault(c, []).append((x, y))

    events = []
    for color in sorted(cells_by_color):
        cells = cells_by_color[color]
        for i in range(len(cells)):
            x1, y1 = cells[i]
            for j in range(i + 1, len(cells)):
                x2, y2 = cells[j]
                if x1 == x2 or y1 == y2:
                    continue
                events.append(AtomicPermEvent(pairs=((x1, y1), (x2, y2)), mark_prob=mark_prob, label=f"c{color}"))
    return events


def random_color_matrix(n: int, delta: int, seed: Optional[int] = None) -> ColorMatrix:
    """随机打乱单元格后每 Δ 个一组着同一种颜色，每种颜色至多出现 Δ 次"""
    if n < 1 or delta < 1:
        raise InvalidParameter(f"参数不合法: n={n}, Δ={delta}")
    rng = stream(config.SEED if seed is None else seed, "color-matrix")
    colors = np.empty(n * n, dtype=np.int64)
    colors[rng.permutation(n * n)] = np.arange(n * n) // delta
    grid = colors.reshape(n, n)
    return ColorMatrix(n=n, colors=tuple(tuple(int(c) for c in row) for row in grid))


def _read_grid(text: str, what: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(io.StringIO(text), header=None, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"{what} CSV 解析失败: {e}")
    if frame.isnull().values.any():
        raise ParseError(f"{what} CSV 存在缺失值")
    return frame


def load_color_matrix(text: str, weights_text: Optional[str] = None) -> ColorMatrix:
    """每行一行颜色的 CSV（整数），可附带同尺寸的权重 CSV"""
    frame = _read_grid(text, "颜色")
    if not all(pd.api.types.is_integer_dtype(t) for t in frame.dtypes):
        raise ParseError("颜色必须是整数")
    n = len(frame)
    if frame.shape != (n, n):
        raise ParseError(f"颜色矩阵必须是方阵，实际为 {frame.shape[0]}×{frame.shape[1]}")
    colors = tuple(tuple(int(c) for c in row) for row in frame.itertuples(index=False))

    weights = None
    if weights_text is not None:
        wframe = _read_grid(weights_text, "权重")
        if wframe.shape != (n, n):
            raise ParseError(f"权重矩阵尺寸 {wframe.shape} 与颜色矩阵不符")
        weights = tuple(tuple(float(w) for w in row) for row in wframe.astype(float).itertuples(index=False))
    return ColorMatrix(n=n, colors=colors, weights=weights)


# ==================== 加权拉丁截线 ====================

def alpha_weighted(n: int) -> float:
    """μ̃(B) = α = 256/(81n²)"""
    return 256.0 / (81.0 * n * n)


def per_cell_bound(n: int) -> float:
    """P_MT(π(x)=y) ≤ 5/(3n)"""
    return 5.0 / (3.0 * n)


def psi_prime_cell_bound(n: int, delta: int) -> float:
    """单格事件的 Ψ′ ≤ 1 + 2nΔα"""
    return 1.0 + 2.0 * n * delta * alpha_weighted(n)


def check_subcritical(m: ColorMatrix) -> None:
    if m.delta > CRITICAL_RATIO * m.n:
        raise SupercriticalColors(f"Δ={m.delta} > 27n/256={CRITICAL_RATIO * m.n:.4f}")


def weighted_transversal(m: ColorMatrix, seed: Optional[int] = None, trial: int = 0,
                         events: Optional[Sequence[AtomicPermEvent]] = None) -> WeightedTransversal:
    """
    在 Δ ≤ 27n/256 时用 Swapping 算法求拉丁截线

    Args:
        m: 着色矩阵
        seed: 主种子
        trial: 试验编号
        events: 预先构造好的坏事件（批量试验时复用）
    """
    check_subcritical(m)
    seed = config.SEED if seed is None else seed
    events = latin_instance(m) if events is None else events
    weights = ClusterWeights.uniform(len(events), alpha_weighted(m.n))
    run = run_swapping(m.n, events, seed=seed, trial=trial, weights=weights)
    cells = tuple((x, y) for x, y in enumerate(run.final.forward))
    if run.terminated:
        colors = [m.colors[x][y] for x, y in cells]
        if len(set(colors)) != len(colors):
            raise InvariantViolation("终止时截线中仍有重复颜色")
    weight = math.fsum(m.weight(x, y) for x, y in cells)
    return WeightedTransversal(cells=cells, weight=weight, terminated=run.terminated, steps=run.steps)


# ==================== Stein 界 ====================

def stein_bound(p: float, y_size: int, n: int) -> float:
    """P(π 避开 Z) ≤ exp(-p|Y|/n)"""
    return math.exp(-p * y_size / n)


def stein_trial(n: int, cells: Sequence[Tuple[int, int]], p: float, rng: np.random.Generator) -> bool:
    """均匀 π 是否避开 Y 的 Bernoulli-p 子集 Z"""
    forward = rng.permutation(n)
    chosen = rng.random(len(cells)) < p
    return not any(forward[x] == y for (x, y), keep in zip(cells, chosen) if keep)


# ==================== γ, f, g ====================

def _smallest_root(c: float, beta: float) -> float:
    """
    γ - c(1+βγ)⁴ = 0 的最小正根

    h(γ) = γ - c(1+βγ)⁴ 是凹函数且 h(0) = -c，在 [0, argmax h] 上对分
    """
    if c < 0 or beta < 0:
        raise InvalidParameter(f"参数必须非负: c={c}, β={beta}")
    if c == 0:
        return 0.0
    if beta == 0:
        return c

    def h(g: float) -> float:
        return g - c * (1.0 + beta * g) ** 4

    peak_arg = 4.0 * c * beta
    if peak_arg >= 1.0:
        raise NoRoot(f"h 在 γ>0 上单调递减，无正根 (c={c}, β={beta})")
    peak = ((1.0 / peak_arg) ** (1.0 / 3.0) - 1.0) / beta
    top = h(peak)
    if top < 0:
        # q = q_max 时 h 在峰值处与0相切
        if top >= -1e-12 * max(1.0, peak):
            return peak
        raise NoRoot(f"h 的最大值 {top:.3e} < 0，无正根 (c={c}, β={beta})")
    if top == 0:
        return peak
    return optimize.bisect(h, 0.0, peak, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def q_max(beta: float) -> float:
    """q_max = 1 - √(1 - (27/256)/β)"""
    if beta <= CRITICAL_RATIO:
        raise OutOfRange(f"需要 β > 27/256，实际 β={beta}")
    return 1.0 - math.sqrt(1.0 - CRITICAL_RATIO / beta)


def gamma_root(beta: float, q: float) -> float:
    """γ - (2q - q²)(1+βγ)⁴ = 0 的最小正根"""
    if beta <= 0 or not 0 <= q <= 1:
        raise InvalidParameter(f"参数不合法: β={beta}, q={q}")
    return _smallest_root(2 * q - q * q, beta)


def f_value(beta: float, q: float) -> float:
    """f(β,q) = q - (e^{-(1-q)β} - 1)/β - 2(1-q)²β²γ(1+βγ)"""
    gamma = gamma_root(beta, q)
    return q - (math.exp(-(1 - q) * beta) - 1.0) / beta - 2.0 * (1 - q) ** 2 * beta ** 2 * gamma * (1 + beta * gamma)


def _safe_f(beta: float, q: float) -> float:
    try:
        return f_value(beta, q)
    except NoRoot:
        return -math.inf


def g_argmax(beta: float) -> Tuple[float, float]:
    """(q*, g(β))：在 [0, q_max] 上先取网格最优点，再在相邻网格点之间做黄金分割"""
    top = q_max(beta)
    grid = np.linspace(0.0, top, _GRID_POINTS)
    values = [_safe_f(beta, q) for q in grid]
    best = int(np.argmax(values))
    if 0 < best < _GRID_POINTS - 1:
        try:
            q_star = optimize.minimize_scalar(
                lambda q: -_safe_f(beta, q), bracket=(grid[best - 1], grid[best], grid[best + 1]),
                method='golden', options={'xtol': 1e-10},
            ).x
        except ValueError:
            # 相邻网格点取值相同，不构成严格的括号
            return float(grid[best]), float(values[best])
        q_star = float(min(max(q_star, 0.0), top))
        value = _safe_f(beta, q_star)
        if value >= values[best]:
            return q_star, value
    return float(grid[best]), float(values[best])


def g_value(beta: float) -> float:
    """g(β) = max_{q∈[0,q_max]} f(β,q)"""
    return g_argmax(beta)[1]


def uniform_column(beta: float) -> float:
    """不做重采样：(1 - e^{-β})/β"""
    return (1.0 - math.exp(-beta)) / beta


def subset_resampling_column(beta: float) -> float:
    """只重采样随机子集：1/2 + ∛(27/(2048β))"""
    return 0.5 + (27.0 / (2048.0 * beta)) ** (1.0 / 3.0)


def reproduce_table(betas: Optional[Sequence[float]] = None) -> List[TableRow]:
    """每个 β 给出 g(β) 与两种对照算法的值（保留3位小数）"""
    rows = []
    for beta in (TABLE_BETAS if betas is None else betas):
        if not CRITICAL_RATIO < beta <= 1:
            raise OutOfRange(f"β={beta} 不在 (27/256, 1] 内")
        q_star, g = g_argmax(beta)
        rows.append(TableRow(
            beta=beta,
            g=round(g, 3),
            uniform=round(uniform_column(beta), 3),
            subset_resampling=round(subset_resampling_column(beta), 3),
            q_star=q_star,
        ))
    return rows


# ==================== 部分拉丁截线 ====================

def mark_rate(n: int, q: float) -> float:
    """r = 1 - √((n(q-1)² + 2q - 1)/(n-1))"""
    if n < 2:
        raise InvalidParameter(f"需要 n ≥ 2: {n}")
    inner = (n * (q - 1) ** 2 + 2 * q - 1) / (n - 1)
    if inner < 0 or inner > 1:
        raise OutOfRange(f"q={q} 在 n={n} 时没有合法的标记概率")
    return 1.0 - math.sqrt(inner)


def partial_alpha(n: int, delta: int, r: float) -> float:
    """满足 α = ((2r - r²)/(n(n-1)))(1 + n(Δ-1)α)⁴ 的最小 α"""
    try:
        return _smallest_root((2 * r - r * r) / (n * (n - 1)), n * (delta - 1))
    except NoRoot:
        raise SupercriticalColors(f"n={n}, Δ={delta}, r={r:.6f} 时簇展开判据无解")


def pair_nib_bound(n: int, delta: int, r: float, alpha: float) -> float:
    """两格同时未标记事件在非初始时刻发生的概率上界"""
    return (1 - r) ** 2 / (n * (n - 1)) * ((1 + (2 * n - 1) * (delta - 1) * alpha) ** 2 - 1)


def expected_removed_bound(u: int, n: int, delta: int, r: float, alpha: float) -> float:
    """E[L_k] ≤ u(1-r)/n - 1 + e^{-u(1-r)/n} + C(u,2)·pair_nib_bound"""
    mean_q = u * (1 - r) / n
    return mean_q - 1.0 + math.exp(-mean_q) + math.comb(u, 2) * pair_nib_bound(n, delta, r, alpha)


def expected_size_lower_bound(m: ColorMatrix, r: float, alpha: float) -> float:
    """E[size] ≥ n - Σ_k E[L_k] 的上界之和"""
    delta = m.delta
    return m.n - math.fsum(expected_removed_bound(u, m.n, delta, r, alpha) for u in m.counts.values())


def _check_removed(color: int, removed: int, q_cells, final_cells) -> None:
    """L_k ≤ |Q_k| - 1 + [Q_k=∅] + #{同色对，至少一格不在 Q_k，且两格都在 π^final 上}"""
    outside = sum(1 for cell in final_cells if cell not in q_cells)
    inside = len(final_cells) - outside
    pairs = inside * outside + outside * (outside - 1) // 2
    bound = len(q_cells) - 1 + (1 if not q_cells else 0) + pairs
    if removed > bound:
        raise InvariantViolation(f"颜色 {color}: L_k={removed} 超过上界 {bound}")


def partial_latin(m: ColorMatrix, q: float, seed: Optional[int] = None, trial: int = 0,
                  events: Optional[Sequence[AtomicPermEvent]] = None) -> PartialLatinResult:
    """
    带标记位的 Swapping 算法 + 删除重复颜色

    Args:
        m: 着色矩阵
        q: 参数 q，标记概率 r 由 mark_rate(n, q) 给出
        seed: 主种子
        trial: 试验编号
        events: 预先构造好的带标记坏事件（mark_prob 必须等于 r）

    Returns:
        PartialLatinResult；每种颜色保留行号最小的一格
    """
    n = m.n
    seed = config.SEED if seed is None else seed
    r = mark_rate(n, q)
    alpha = partial_alpha(n, m.delta, r)
    events = latin_instance(m, mark_prob=r) if events is None else events
    run = run_swapping(n, events, seed=seed, trial=trial, weights=ClusterWeights.uniform(len(events), alpha))

    initial_marks = run.initial_marks or (0,) * n
    q_cells: Dict[int, set] = {}
    for x, (y, mark) in enumerate(zip(run.initial.forward, initial_marks)):
        if mark == 0:
            q_cells.setdefault(m.colors[x][y], set()).add((x, y))

    final_cells: Dict[int, List[Tuple[int, int]]] = {}
    for x, y in enumerate(run.final.forward):
        final_cells.setdefault(m.colors[x][y], []).append((x, y))

    kept = []
    removed: Dict[int, int] = {}
    for color, cells in sorted(final_cells.items()):
        kept.append(cells[0])
        if len(cells) > 1:
            removed[color] = len(cells) - 1
        _check_removed(color, len(cells) - 1, q_cells.get(color, set()), cells)

    return PartialLatinResult(
        n=n,
        kept=tuple(sorted(kept)),
        removed=removed,
        q_sizes={color: len(cells) for color, cells in q_cells.items()},
        mark_rate=r,
        steps=run.steps,
        terminated=run.terminated,
    )
