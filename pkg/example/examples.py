#!/usr/bin/env python3
"""
nlgnn 库使用示例
================

本文件演示了 nlgnn 库的核心功能，包括：
1. 合成图：生成指定同配率的图并统计
2. 单次训练：比较常规 GNN 与非局部变体
3. 注意力排序：查看排序后标签的聚集程度
4. 规模实验：排序聚合与全注意力的耗时对比

运行方式：
    python examples.py
"""

import sys
import tempfile
from pathlib import Path

# 尝试导入 rich 库以获得更好的终端输出体验
try:
    from rich.console import Console
    from rich.table import Table
    from rich.panel import Panel
    from rich import print as rprint
    HAS_RICH = True
    console = Console()
except ImportError:
    HAS_RICH = False
    print("提示: 安装 'rich' 库可获得更美观的输出 (pip install rich)")

# 导入核心库
try:
    from nlgnn import (
        TrainConfig, dataset_statistics, export_sorted, generate_synthetic, scaling_experiment,
        split_nodes, train,
    )
except ImportError:
    print("错误: 无法导入 nlgnn。请确保已安装该包 (pip install .)")
    sys.exit(1)


def print_header(title):
    """打印带格式的标题"""
    if HAS_RICH:
        console.print(Panel(f"[bold cyan]{title}[/bold cyan]", expand=False))
    else:
        print(f"\n=== {title} ===")


def demo_synthetic():
    """演示合成图生成"""
    print_header("1. 合成图")

    graphs = [generate_synthetic(n=600, num_classes=3, target_h=h, d=24, mean_degree=5.0,
                                 feature_noise=0.3, seed=0, name=f"h={h}") for h in (0.1, 0.5, 0.9)]

    if HAS_RICH:
        table = Table(title="不同目标同配率")
        table.add_column("名称", style="cyan")
        table.add_column("节点")
        table.add_column("边")
        table.add_column("同配率 H(G)", style="green")
        for g in graphs:
            row = dataset_statistics(g).as_row()
            table.add_row(row["name"], str(row["nodes"]), str(row["edges"]), row["homophily"])
        console.print(table)
    else:
        for g in graphs:
            row = dataset_statistics(g).as_row()
            print(f"  {row['name']:8s}: nodes={row['nodes']}, edges={row['edges']}, H={row['homophily']}")
    return graphs[0]


def demo_training(g):
    """演示单次训练"""
    print_header("2. 单次训练")

    split = split_nodes(g, seed=0)
    print(f"划分大小 (train, val, test): {split.sizes()}")
    results = {}
    params = None
    for variant in ("MLP", "GCN", "NLMLP", "NLGCN"):
        cfg = TrainConfig.preset("fast", variant)
        run, trained = train(g, split, cfg)
        results[variant] = run
        if variant == "NLMLP":
            params = trained

    if HAS_RICH:
        table = Table(show_header=True)
        table.add_column("模型")
        table.add_column("测试准确率")
        table.add_column("最佳轮次")
        table.add_column("ms/epoch")
        for variant, run in results.items():
            table.add_row(variant, f"{run.test_accuracy:.4f}", str(run.best_epoch),
                          f"{run.wall_ms_per_epoch:.2f}")
        console.print(table)
    else:
        for variant, run in results.items():
            print(f"  {variant:6s}: acc={run.test_accuracy:.4f}, epoch={run.best_epoch}")
    return params


def demo_sorting(g, params):
    """演示注意力排序导出"""
    print_header("3. 注意力排序")

    with tempfile.TemporaryDirectory() as tmp:
        export = export_sorted(g, params, Path(tmp) / "sorted.csv")
        summary = export.summary()

    print(f"原图同配率 H(G):         {summary['homophily']:.4f}")
    print(f"重连图同配率 (s={export.window}):   {summary['reconnected_homophily']:.4f}")
    print(f"排序后平均同标签段长:    {summary['run_length']:.2f}")
    print(f"随机打乱的段长中位数:    {summary['shuffled_run_length_median']:.2f}")


def demo_scaling():
    """演示规模实验"""
    print_header("4. 规模实验")

    report = scaling_experiment(sizes=[500, 1000, 2000], f=16, repeats=1)
    for row in report.rows:
        print(f"  n={row.n:5d}: 排序 {row.sorted_ms:8.2f} ms, 全注意力 {row.baseline_ms:8.2f} ms, "
              f"加速 {row.speedup:.1f}x")
    print(f"对数斜率: 排序 {report.sorted_slope:.2f}, 全注意力 {report.baseline_slope:.2f}")


def main():
    if HAS_RICH:
        rprint("[bold green]nlgnn 示例程序启动[/bold green]")

    g = demo_synthetic()
    print()
    params = demo_training(g)
    print()
    demo_sorting(g, params)
    print()
    demo_scaling()

if __name__ == "__main__":
    main()
