"""
命令行入口 - lllforge <group> <command> [options]

退出码：0 正常，1 存在不一致的判定，2 输入错误
"""

import logging
import sys
from pathlib import Path
from typing import Any, Callable, List, Optional

import click
from pydantic import ValidationError

from apps.ksat import load_dimacs
from apps.latin import load_color_matrix
from apps.transversal import load_block_graph
from core.config import config
from core.exceptions import BudgetExceeded, CriterionError, InputError, LLLForgeError
from core.events import ScopedEvent
from core.models import DepGraph, DisjunctionRequest, ExperimentConfig, Report, ShearerRequest, VarSpace
from . import experiments
from .reports import write_report

logger = logging.getLogger(__name__)


# ==================== 参数类型 ====================

class FloatList(click.ParamType):
    """逗号分隔的浮点数，或 start:stop:step（含端点）"""
    name = "floats"

    def convert(self, value, param, ctx) -> List[float]:
        if isinstance(value, list):
            return value
        try:
            if ':' in value:
                start, stop, step = (float(x) for x in value.split(':'))
                if step <= 0 or stop < start:
                    raise ValueError("需要 step > 0 且 stop ≥ start")
                count = int(round((stop - start) / step))
                return [round(start + i * step, 10) for i in range(count + 1)]
            return [float(x) for x in value.split(',') if x.strip()]
        except ValueError as e:
            self.fail(f"无法解析 {value!r}: {e}", param, ctx)


class IntList(click.ParamType):
    """逗号分隔的整数"""
    name = "ints"

    def convert(self, value, param, ctx) -> List[int]:
        if isinstance(value, list):
            return value
        try:
            return [int(x) for x in value.split(',') if x.strip()]
        except ValueError:
            self.fail(f"无法解析 {value!r}", param, ctx)


FLOATS = FloatList()
INTS = IntList()


def common_options(fn: Callable) -> Callable:
    """各子命令共享的实验参数"""
    options = [
        click.option('--seed', type=int, default=None, help="主种子（默认 LLLFORGE_SEED）"),
        click.option('--trials', type=click.IntRange(min=1), default=None, help="试验次数"),
        click.option('--level', type=click.Choice(['0.95', '0.99']), default=None, help="置信水平"),
        click.option('--jobs', type=click.IntRange(min=1), default=None, help="并行线程数"),
        click.option('--max-steps', type=click.IntRange(min=1), default=None, help="单次运行的最大重采样次数"),
        click.option('--format', 'fmt', type=click.Choice(['json', 'csv']), default='json', help="输出格式"),
        click.option('--out', type=click.Path(dir_okay=False), default=None, help="输出路径（默认标准输出）"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _config(seed, trials, level, jobs, max_steps, fmt, out, **params: Any) -> ExperimentConfig:
    values = {'seed': seed, 'trials': trials, 'level': float(level) if level else None, 'jobs': jobs,
              'max_steps': max_steps, 'format': fmt, 'out': out}
    return ExperimentConfig(**{k: v for k, v in values.items() if v is not None}, params=params)


def _read(path: Optional[str]) -> Optional[str]:
    return None if path is None else Path(path).read_text(encoding='utf-8')


def _run(options: dict, build: Callable[[ExperimentConfig], Report]) -> None:
    """构造配置、执行、写出报告并按判定设置退出码"""
    try:
        cfg = _config(**options)
        report = build(cfg)
        text = write_report(report, cfg.format, cfg.out)
    except (InputError, CriterionError, BudgetExceeded, ValidationError) as e:
        logger.error(f"输入错误: {e}")
        click.echo(f"错误: {e}", err=True)
        sys.exit(2)
    except LLLForgeError as e:
        logger.error(f"运行失败: {e}")
        click.echo(f"失败: {e}", err=True)
        sys.exit(1)

    if not cfg.out:
        click.echo(text, nl=False)
    if report.has_violation:
        names = [v.name for v in report.verdicts if not v.ok]
        logger.warning(f"{len(names)} 项判定不一致: {names}")
        sys.exit(1)


# ==================== 命令 ====================

@click.group(context_settings={'help_option_names': ['-h', '--help']})
@click.option('-v', '--verbose', is_flag=True, help="输出 DEBUG 日志")
def cli(verbose: bool):
    """lllforge - Lovász 局部引理的算法、界与验证"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, config.LOG_LEVEL),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True,
    )


@cli.group()
def ksat():
    """有界出现次数 k-SAT"""


@ksat.command('independence')
@click.option('--dimacs', type=click.Path(exists=True, dir_okay=False), default=None, help="DIMACS CNF 文件")
@click.option('--n', 'n', type=click.IntRange(min=1), default=60, show_default=True)
@click.option('--k', 'k', type=click.IntRange(min=1), default=6, show_default=True)
@click.option('--L', 'L', type=click.IntRange(min=1), default=3, show_default=True)
@click.option('--j', 'js', type=click.IntRange(min=1), multiple=True, help="维数，可重复（默认 1,2,3）")
@common_options
def ksat_independence(dimacs, n, k, L, js, **options):
    """MT 输出的 j 维独立性与 ε = e·L·2^{-k}"""
    def build(cfg):
        cnf = load_dimacs(_read(dimacs)) if dimacs else None
        return experiments.ksat_independence(cfg, cnf=cnf, n=n, k=k, L=L, js=tuple(js) or (1, 2, 3))
    _run(options, build)


@ksat.command('implicates')
@click.option('--random-instances', type=click.IntRange(min=0), default=20, show_default=True)
@click.option('--n', 'n', type=click.IntRange(min=1), default=12, show_default=True)
@click.option('--k', 'k', type=click.IntRange(min=1), default=4, show_default=True)
@click.option('--L', 'L', type=click.IntRange(min=1), default=2, show_default=True)
@common_options
def ksat_implicates(random_instances, n, k, L, **options):
    """蕴含子句的长度"""
    _run(options, lambda cfg: experiments.ksat_implicates(cfg, random_instances=random_instances, n=n, k=k, L=L))


@cli.group()
def transversal():
    """独立截线"""


@transversal.command('bound')
@click.option('--b', 'b', type=int, required=True)
@click.option('--delta', type=int, required=True)
@click.option('--ell', type=int, required=True)
@common_options
def transversal_bound(b, delta, ell, **options):
    """α、α′ 与回避概率界"""
    _run(options, lambda cfg: experiments.transversal_bound(cfg, b, delta, ell))


@transversal.command('avoid')
@click.option('--instance', type=click.Path(exists=True, dir_okay=False), default=None, help="JSON 实例")
@click.option('--k', 'k', type=click.IntRange(min=1), default=8, show_default=True)
@click.option('--b', 'b', type=click.IntRange(min=1), default=10, show_default=True)
@click.option('--delta', type=click.IntRange(min=1), default=2, show_default=True)
@click.option('--sizes', type=INTS, default="1,3,5", show_default=True, help="回避集合大小")
@common_options
def transversal_avoid(instance, k, b, delta, sizes, **options):
    """经验 P(L ∩ T ≠ ∅) 与回避界"""
    def build(cfg):
        if instance:
            graph, avoid = load_block_graph(_read(instance))
            return experiments.transversal_avoid(cfg, graph=graph, avoid=avoid)
        return experiments.transversal_avoid(cfg, k=k, b=b, delta=delta, sizes=sizes)
    _run(options, build)


@transversal.command('find')
@click.option('--instance', type=click.Path(exists=True, dir_okay=False), required=True, help="JSON 实例")
@click.option('--max-restarts', type=click.IntRange(min=1), default=None)
@common_options
def transversal_find(instance, max_restarts, **options):
    """找一个与 L 不相交的独立截线"""
    def build(cfg):
        graph, avoid = load_block_graph(_read(instance))
        return experiments.transversal_find(cfg, graph, avoid, max_restarts=max_restarts)
    _run(options, build)


@cli.group()
def latin():
    """拉丁截线"""


@latin.command('table')
@click.option('--beta', type=FLOATS, default=None, help="例如 0.11:0.25:0.01 或 0.11,0.15")
@common_options
def latin_table(beta, **options):
    """g(β) 数值表"""
    _run(options, lambda cfg: experiments.latin_table(cfg, beta))


@latin.command('weighted')
@click.option('--matrix', type=click.Path(exists=True, dir_okay=False), default=None, help="颜色 CSV")
@click.option('--weights', type=click.Path(exists=True, dir_okay=False), default=None, help="权重 CSV")
@click.option('--n', 'n', type=click.IntRange(min=2), default=32, show_default=True)
@click.option('--delta', type=click.IntRange(min=1), default=3, show_default=True)
@common_options
def latin_weighted(matrix, weights, n, delta, **options):
    """加权拉丁截线的每格频率与平均权重"""
    def build(cfg):
        m = load_color_matrix(_read(matrix), _read(weights)) if matrix else None
        return experiments.latin_weighted(cfg, n=n, delta=delta, matrix=m)
    _run(options, build)


@latin.command('partial')
@click.option('--matrix', type=click.Path(exists=True, dir_okay=False), default=None, help="颜色 CSV")
@click.option('--n', 'n', type=click.IntRange(min=2), default=100, show_default=True)
@click.option('--beta', type=float, default=0.15, show_default=True)
@click.option('--q', 'q', type=click.FloatRange(0, 1), default=None, help="默认取使 f(β,q) 最大的 q")
@click.option('--runs', type=click.IntRange(min=1), default=None, help="运行次数（默认 --trials）")
@click.option('--slack', type=float, default=0.05, show_default=True)
@common_options
def latin_partial(matrix, n, beta, q, runs, slack, **options):
    """部分拉丁截线的大小"""
    def build(cfg):
        m = load_color_matrix(_read(matrix)) if matrix else None
        return experiments.latin_partial(cfg, n=n, beta=beta, q=q, matrix=m, runs=runs, slack=slack)
    _run(options, build)


@latin.command('stein')
@click.option('--n', 'n', type=click.IntRange(min=1), default=50, show_default=True)
@click.option('--sizes', type=INTS, default="25,100", show_default=True, help="|Y|")
@click.option('--p', 'ps', type=FLOATS, default="0.2,0.5", show_default=True)
@common_options
def latin_stein(n, sizes, ps, **options):
    """均匀排列避开随机单元格集合的概率"""
    _run(options, lambda cfg: experiments.latin_stein(cfg, n=n, sizes=sizes, ps=ps))


@cli.group()
def bounds():
    """解析界与判据"""


@bounds.command('shearer')
@click.option('--graph', type=click.Path(exists=True, dir_okay=False), required=True,
              help='JSON：{"m": 3, "edges": [[0, 1]], "probs": [0.1, 0.1, 0.1]}')
@common_options
def bounds_shearer(graph, **options):
    """Shearer 测度"""
    def build(cfg):
        request = ShearerRequest.model_validate_json(_read(graph))
        if any(not (0 <= a < request.m and 0 <= b < request.m) for a, b in request.edges):
            raise InputError(f"边的端点超出 [0, {request.m})")
        return experiments.bounds_shearer(cfg, DepGraph.from_edges(request.m, request.edges, request.probs))
    _run(options, build)


@bounds.command('epsilon')
@click.option('--k', 'k', type=int, required=True)
@click.option('--L', 'L', type=int, required=True)
@common_options
def bounds_epsilon(k, L, **options):
    """ε = e·L·2^{-k}"""
    _run(options, lambda cfg: experiments.bounds_epsilon(cfg, k, L))


@bounds.command('alpha')
@click.option('--b', 'b', type=int, required=True)
@click.option('--delta', type=int, required=True)
@common_options
def bounds_alpha(b, delta, **options):
    """独立截线的簇展开权重 α"""
    _run(options, lambda cfg: experiments.bounds_alpha(cfg, b, delta))


@bounds.command('avoidance')
@click.option('--b', 'b', type=int, required=True)
@click.option('--delta', type=int, required=True)
@click.option('--ell', type=int, required=True)
@common_options
def bounds_avoidance(b, delta, ell, **options):
    """回避概率界"""
    _run(options, lambda cfg: experiments.bounds_avoidance(cfg, b, delta, ell))


@bounds.command('disjunction')
@click.option('--instance', type=click.Path(exists=True, dir_okay=False), required=True,
              help='JSON：{"n": 3, "bad": [[[0, 0], [1, 0]]], "members": [[[1, 1]], [[2, 0]]]}')
@click.option('--best-order', is_flag=True, help="穷举全部顺序（至多 8 个成员），报告有序界最小的顺序")
@common_options
def bounds_disjunction(instance, best_order, **options):
    """变量模型中 P_MT(∨𝓐) 的析取界"""
    def build(cfg):
        request = DisjunctionRequest.model_validate_json(_read(instance))
        space = VarSpace.uniform(request.n, request.domain)
        bad = [ScopedEvent.atomic(pairs, label=f"B{idx}") for idx, pairs in enumerate(request.bad)]
        members = [ScopedEvent.atomic(pairs, label=f"A{idx}") for idx, pairs in enumerate(request.members)]
        return experiments.bounds_disjunction(cfg, space, bad, members, order=request.order, best_order=best_order)
    _run(options, build)


@cli.command('verify')
@click.option('--suite', type=click.Choice(sorted(experiments.SUITES)), default='core', show_default=True)
@common_options
def verify(suite, **options):
    """界的一致性检验套件"""
    trials = options.get('trials')
    _run(options, lambda cfg: experiments.verify(cfg, suite=suite, trials=trials))


if __name__ == "__main__":
    cli()
