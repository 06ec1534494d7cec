#!/usr/bin/env python3
"""
非局部图神经网络实验工具 - 命令行接口
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from .bench import bench_runtime, export_sorted, scaling_experiment
from .config import (
    BENCH_CSV_FIELDS, CATEGORY_CSV_FIELDS, DEFAULT_MAX_EPOCHS, DEFAULT_REPEATS, DEFAULT_SCALING_DIM,
    DEFAULT_SCALING_SIZES, EVALUATE_CSV_FIELDS, LEADERBOARD_CSV_FIELDS, RUN_CSV_FIELDS,
    SCALING_CSV_FIELDS, STATS_CSV_FIELDS, SYNTHETIC_DEFAULTS, VARIANTS, WARMUP_EPOCHS, TrainConfig,
)
from .data_source import SyntheticGraphSource, get_graph, write_graph
from .errors import ConfigError, NLGNNError
from .graph_data import Graph
from .homophily import dataset_statistics
from .model import load_params, save_params
from .reports import write_report, write_sidecar
from .rich_output import ReportPrinter, configure_logging
from .splits import split_nodes
from .training import categorize_dataset, evaluate_mean, grid_configs, grid_search, train

logger = logging.getLogger(__name__)


# ==================== 参数解析辅助 ====================

def parse_int_list(text: str) -> List[int]:
    """解析 "1024,2048,4096" 形式的整数列表"""
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"无法解析整数列表: {text!r}") from None


def parse_models(text: str) -> List[str]:
    """解析 "gcn,nlgcn" 形式的模型列表"""
    models = [part.strip().upper() for part in text.split(",") if part.strip()]
    unknown = [m for m in models if m not in VARIANTS]
    if unknown or not models:
        raise argparse.ArgumentTypeError(f"未知模型 {unknown}，可用: {list(VARIANTS)}")
    return models


def build_train_config(args: argparse.Namespace, variant: Optional[str] = None) -> TrainConfig:
    """预设配置 + 命令行显式给出的字段"""
    cfg = TrainConfig.preset(args.preset, variant or args.model)
    overrides = {
        "hidden": args.hidden, "dropout": args.dropout, "weight_decay": args.weight_decay,
        "lr": args.lr, "kernel_size": args.kernel, "max_epochs": args.epochs,
    }
    return cfg.with_(seed=args.seed, **{k: v for k, v in overrides.items() if v is not None})


def load_input_graphs(args: argparse.Namespace) -> List[Graph]:
    """--manifest 给出的数据集；未给出时按合成参数生成一张图"""
    if args.manifest:
        return [get_graph(path) for path in args.manifest]
    source = SyntheticGraphSource(seed=args.seed, **synthetic_params(args))
    logger.info("未指定 --manifest，使用%s", source.description)
    return [source.load()]


def load_input_graph(args: argparse.Namespace) -> Graph:
    graphs = load_input_graphs(args)
    if len(graphs) != 1:
        raise ConfigError(f"{args.command} 只接受一个 --manifest")
    return graphs[0]


def synthetic_params(args: argparse.Namespace) -> Dict:
    return {
        "n": args.n, "num_classes": args.classes, "target_h": args.homophily,
        "d": args.features, "mean_degree": args.degree, "feature_noise": args.noise,
    }


def seed_list(args: argparse.Namespace) -> List[int]:
    return list(range(args.seed, args.seed + args.repeats))


def out_path(args: argparse.Namespace, filename: str) -> Path:
    return Path(args.out) / filename


# ==================== 子命令 ====================

def cmd_analyze(args: argparse.Namespace, printer: ReportPrinter) -> int:
    rows = [dataset_statistics(g).as_row() for g in load_input_graphs(args)]
    printer.print_table("数据集统计", STATS_CSV_FIELDS, rows)
    path = write_report(out_path(args, "stats.csv"), STATS_CSV_FIELDS, rows, "analyze",
                        {"manifest": args.manifest or "synthetic"}, args.seed)
    printer.print_outputs([str(path)])
    return 0


def cmd_categorize(args: argparse.Namespace, printer: ReportPrinter) -> int:
    g = load_input_graph(args)
    base = build_train_config(args, "MLP")
    report = categorize_dataset(g, seed_list(args), base)
    rows = report.rows()
    printer.print_table(f"{g.name}: MLP 与 GNN 对比", CATEGORY_CSV_FIELDS, rows)
    printer.print_info(f"{g.name} 判定为 {report.label}")
    path = write_report(out_path(args, "category.csv"), CATEGORY_CSV_FIELDS, rows, "categorize",
                        base.to_dict(), args.seed, {"category": report.label, "evidence": rows})
    printer.print_outputs([str(path)])
    return 0


def cmd_train(args: argparse.Namespace, printer: ReportPrinter) -> int:
    g = load_input_graph(args)
    cfg = build_train_config(args)
    written = []
    if args.repeats == 1:
        run, params = train(g, split_nodes(g, seed=args.seed), cfg)
        rows = [run.as_row()]
        if args.save_params:
            written.append(str(save_params(params, args.save_params)))
        summary = {"test_accuracy": run.test_accuracy, "best_val_accuracy": run.best_val_accuracy,
                   "best_epoch": run.best_epoch}
    else:
        if args.save_params:
            raise ConfigError("--save-params 只能用于单次训练 (--repeats 1)")
        result = evaluate_mean(g, cfg, seeds=seed_list(args))
        rows = [r.as_row() for r in result.runs]
        summary = result.as_row()
        path = write_report(out_path(args, "evaluate.csv"), EVALUATE_CSV_FIELDS, [summary], "train",
                            cfg.to_dict(), args.seed)
        written.append(str(path))
    printer.print_table(f"{cfg.variant} 训练结果", RUN_CSV_FIELDS, rows)
    printer.print_summary("汇总", summary)
    path = write_report(out_path(args, "train.csv"), RUN_CSV_FIELDS, rows, "train", cfg.to_dict(), args.seed)
    printer.print_outputs([str(path)] + written)
    return 0


def cmd_grid(args: argparse.Namespace, printer: ReportPrinter) -> int:
    g = load_input_graph(args)
    base = build_train_config(args)
    seeds = seed_list(args)
    with printer.show_progress() as progress:
        task = progress.add_task(f"{base.variant} 网格搜索", total=len(grid_configs(base.variant, base=base)))
        result = grid_search(g, seeds, base.variant, base=base, workers=args.workers,
                             on_cell=lambda entry: progress.advance(task))
    rows = result.rows()
    printer.print_table(f"{base.variant} 排行榜（前 10）", LEADERBOARD_CSV_FIELDS, rows[:10], highlight_first=True)
    path = write_report(out_path(args, "leaderboard.csv"), LEADERBOARD_CSV_FIELDS, rows, "grid",
                        {**base.to_dict(), "split_seeds": seeds}, args.seed,
                        {"best": result.best.to_dict(), "leaderboard": rows})
    printer.print_outputs([str(path)])
    return 0


def cmd_bench(args: argparse.Namespace, printer: ReportPrinter) -> int:
    g = load_input_graph(args)
    cfgs = [build_train_config(args, model) for model in args.models]
    report = bench_runtime(g, cfgs, epochs=args.epochs or DEFAULT_MAX_EPOCHS, warmup=args.warmup,
                           split_seed=args.seed, threads=args.threads)
    rows = [r.as_row() for r in report.rows]
    printer.print_table(f"每轮训练耗时（基准 {report.reference}）", BENCH_CSV_FIELDS, rows)
    path = write_report(out_path(args, "bench.csv"), BENCH_CSV_FIELDS, rows, "bench",
                        {"models": args.models, "epochs": report.epochs, "warmup": report.warmup},
                        args.seed, threads=args.threads)
    printer.print_outputs([str(path)])
    return 0


def cmd_scaling(args: argparse.Namespace, printer: ReportPrinter) -> int:
    report = scaling_experiment(args.sizes, args.dim, args.kernel or 3, args.seed, args.timing_repeats,
                                args.threads)
    rows = [r.as_row() for r in report.rows]
    printer.print_table("规模实验", SCALING_CSV_FIELDS, rows)
    slopes = {"排序路径斜率": report.sorted_slope, "全注意力斜率": report.baseline_slope}
    printer.print_summary("对数-对数斜率", slopes)
    if report.partial:
        printer.print_error("全注意力在较大规模下内存不足，报告不完整")
    path = write_report(out_path(args, "scaling.csv"), SCALING_CSV_FIELDS, rows, "scaling",
                        {"sizes": args.sizes, "dim": args.dim, "kernel_size": args.kernel or 3},
                        args.seed,
                        {"rows": rows, "sorted_slope": report.sorted_slope,
                         "baseline_slope": report.baseline_slope, "partial": report.partial},
                        threads=args.threads)
    printer.print_outputs([str(path)])
    return 0


def cmd_generate(args: argparse.Namespace, printer: ReportPrinter) -> int:
    params = synthetic_params(args)
    source = SyntheticGraphSource(seed=args.seed, **params)
    g = source.load()
    name = args.name or source.name
    manifest = write_graph(g, args.out, name)
    stats = dataset_statistics(g).as_row()
    printer.print_summary(f"合成图 {name}", stats)
    write_sidecar(manifest.with_name(f"{name}.csv"), "generate", params, args.seed, stats)
    printer.print_outputs([str(manifest)])
    return 0


def cmd_export_sorted(args: argparse.Namespace, printer: ReportPrinter) -> int:
    g = load_input_graph(args)
    params = load_params(args.params) if args.params else None
    export = export_sorted(g, params, out_path(args, "sorted.csv"), s=args.window, seed=args.seed)
    summary = export.summary()
    printer.print_summary(f"{g.name} 注意力排序", summary)
    write_sidecar(export.path, "export-sorted", {"params": args.params, "window": export.window},
                  args.seed, summary)
    printer.print_outputs([str(export.path)])
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace, ReportPrinter], int]] = {
    "analyze": cmd_analyze,
    "categorize": cmd_categorize,
    "train": cmd_train,
    "grid": cmd_grid,
    "bench": cmd_bench,
    "scaling": cmd_scaling,
    "generate": cmd_generate,
    "export-sorted": cmd_export_sorted,
}


# ==================== 解析器 ====================

def build_parser() -> argparse.ArgumentParser:
    """构造命令行解析器"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0, help='随机种子 (默认: 0)')
    common.add_argument('--out', type=str, default='results', help='输出目录 (默认: results)')
    common.add_argument('--manifest', type=str, action='append', metavar='PATH',
                        help='数据集清单文件，可重复；未指定时使用合成图')
    common.add_argument('-v', '--verbose', action='count', default=0, help='日志详细程度 (-v / -vv)')
    common.add_argument('--threads', type=int, default=None, help='声明的线程数（写入报告）')

    synthetic = common.add_argument_group('合成图参数', '未指定 --manifest 时使用')
    synthetic.add_argument('--n', type=int, default=SYNTHETIC_DEFAULTS['n'], help='节点数')
    synthetic.add_argument('--classes', type=int, default=SYNTHETIC_DEFAULTS['num_classes'], help='类别数')
    synthetic.add_argument('--homophily', type=float, default=SYNTHETIC_DEFAULTS['target_h'], help='目标同配率')
    synthetic.add_argument('--features', type=int, default=SYNTHETIC_DEFAULTS['d'], help='特征维数')
    synthetic.add_argument('--degree', type=float, default=SYNTHETIC_DEFAULTS['mean_degree'], help='平均度')
    synthetic.add_argument('--noise', type=float, default=SYNTHETIC_DEFAULTS['feature_noise'], help='特征翻转概率')

    hyper = argparse.ArgumentParser(add_help=False)
    group = hyper.add_argument_group('训练参数')
    group.add_argument('--preset', type=str, default='full', choices=['full', 'fast'], help='预设配置')
    group.add_argument('--model', type=str.upper, default='NLMLP', choices=list(VARIANTS), help='模型变体')
    group.add_argument('--hidden', type=int, help='隐藏单元数')
    group.add_argument('--dropout', type=float, help='dropout 概率')
    group.add_argument('--weight-decay', dest='weight_decay', type=float, help='权重衰减')
    group.add_argument('--lr', type=float, help='学习率')
    group.add_argument('--kernel', type=int, help='卷积核大小')
    group.add_argument('--epochs', type=int, help=f'训练轮数 (默认: {DEFAULT_MAX_EPOCHS})')
    group.add_argument('--repeats', type=int, default=1, help='随机划分重复次数')

    parser = argparse.ArgumentParser(
        prog='nlgnn',
        description='非局部图神经网络实验工具',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
使用示例:
  %(prog)s generate --n 2000 --classes 5 --homophily 0.1 --name synthetic --out data
  %(prog)s analyze --manifest data/synthetic.manifest
  %(prog)s train --manifest m.txt --model nlmlp --save-params nlmlp.npz
  %(prog)s bench --models gcn,nlgcn --epochs 500
  %(prog)s export-sorted --manifest m.txt --params nlmlp.npz
''')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND', required=True)

    sub.add_parser('analyze', parents=[common], help='同配率与数据集统计')

    p = sub.add_parser('categorize', parents=[common, hyper], help='比较 MLP 与 GCN/GAT 判定数据集类别')
    p.set_defaults(repeats=DEFAULT_REPEATS)

    p = sub.add_parser('train', parents=[common, hyper], help='训练并报告测试准确率')
    p.add_argument('--save-params', dest='save_params', type=str, metavar='PATH', help='保存最佳参数 (.npz)')

    p = sub.add_parser('grid', parents=[common, hyper], help='超参数网格搜索')
    p.add_argument('--workers', type=int, default=1, help='并行线程数')

    p = sub.add_parser('bench', parents=[common, hyper], help='每轮训练耗时')
    p.add_argument('--models', type=parse_models, default=['GCN', 'NLGCN'], help='模型列表，如 gcn,nlgcn')
    p.add_argument('--warmup', type=int, default=WARMUP_EPOCHS, help='预热轮数')

    p = sub.add_parser('scaling', parents=[common], help='排序聚合与全注意力的规模实验')
    p.add_argument('--sizes', type=parse_int_list, default=list(DEFAULT_SCALING_SIZES), help='节点数列表')
    p.add_argument('--dim', type=int, default=DEFAULT_SCALING_DIM, help='嵌入维数')
    p.add_argument('--kernel', type=int, default=3, help='卷积核大小')
    p.add_argument('--timing-repeats', dest='timing_repeats', type=int, default=3, help='每个规模的重复次数')

    p = sub.add_parser('generate', parents=[common], help='生成合成图')
    p.add_argument('--name', type=str, help='数据集名称')

    p = sub.add_parser('export-sorted', parents=[common], help='导出注意力排序')
    p.add_argument('--params', type=str, metavar='PATH', help='train --save-params 保存的参数')
    p.add_argument('--window', type=int, help='重连图半宽（默认: 卷积感受野半宽）')

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主函数；返回进程退出码"""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    printer = ReportPrinter()
    printer.print_header(f"nlgnn {args.command}")
    try:
        return COMMANDS[args.command](args, printer)
    except (NLGNNError, OSError) as e:
        logger.debug("命令失败", exc_info=True)
        printer.print_error(str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
