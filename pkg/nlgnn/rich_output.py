#!/usr/bin/env python3
"""
结果美观输出类
使用 rich 库实现命令行表格、面板与日志
"""

import logging
from typing import Any, Dict, List, Mapping, Optional, Sequence

from rich.align import Align
from rich.box import ROUNDED
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn
from rich.rule import Rule
from rich.table import Table
from rich.text import Text


def configure_logging(verbosity: int = 0, console: Optional[Console] = None) -> None:
    """
    安装 RichHandler

    参数:
        verbosity: 0 为 WARNING，1 为 INFO，2 及以上为 DEBUG
    """
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    handler = RichHandler(console=console or Console(stderr=True), show_path=False,
                          rich_tracebacks=True, markup=False)
    root = logging.getLogger("nlgnn")
    for old in list(root.handlers):
        root.removeHandler(old)
    root.addHandler(handler)
    root.setLevel(level)
    root.propagate = False


class ReportPrinter:
    """实验结果的美观输出类"""

    def __init__(self, console: Optional[Console] = None):
        """
        初始化输出器

        参数:
            console: 输出目标（测试时可传入 record=True 的 Console）
        """
        self.console = console or Console()

        # 计算表格宽度（终端宽度的85%）
        terminal_width = self.console.size.width
        self.table_width = int(terminal_width * 0.85)

        # 定义颜色主题
        self.theme = {
            'title': 'bold cyan',
            'key': 'bold white',
            'value': 'white',
            'warning': 'bold red',
            'success': 'bold green',
            'info': 'bold blue',
            'highlight': 'bold magenta',
            'border': 'bold blue',
            'number': 'bold yellow',
        }

    @staticmethod
    def format_cell(value: Any) -> str:
        """表格单元格：浮点数保留 4 位小数，None 显示为 -"""
        if value is None or value == "":
            return "-"
        if isinstance(value, float):
            return f"{value:.4f}"
        return str(value)

    def _create_standard_table(self, title: str, show_header: bool = True, style: Optional[str] = None,
                               columns: Optional[Sequence[str]] = None) -> Table:
        """创建标准格式的表格

        参数:
            title: 表格标题
            show_header: 是否显示表头
            columns: 列名列表；缺省为 (属性, 数值) 两列
        """
        style = style or self.theme['border']
        table = Table(
            title=title,
            show_header=show_header,
            box=ROUNDED,
            header_style=style,
            border_style=style,
            title_style=style,
            padding=(0, 1),
            width=self.table_width
        )

        if columns:
            for name in columns:
                table.add_column(name, style=self.theme['value'])
        else:
            table.add_column("属性", ratio=4, style=self.theme['key'])
            table.add_column("数值", ratio=6, style=self.theme['value'])

        return table

    def print_table(self, title: str, fields: Sequence[str], rows: Sequence[Mapping[str, Any]],
                    highlight_first: bool = False) -> None:
        """按 CSV 表头打印结果表格"""
        if not rows:
            self.print_error(f"{title}: 没有结果")
            return
        table = self._create_standard_table(f"📊 {title} ({len(rows)} 行)", columns=fields)
        for i, row in enumerate(rows):
            cells = [self.format_cell(row.get(name)) for name in fields]
            style = self.theme['highlight'] if highlight_first and i == 0 else None
            table.add_row(*cells, style=style)
        self.console.print(Align.center(table))

    def print_summary(self, title: str, values: Dict[str, Any]) -> None:
        """两列键值表"""
        table = self._create_standard_table(title, show_header=False)
        for key, value in values.items():
            table.add_row(Text(key), Text(self.format_cell(value), style=self.theme['number']))
        self.console.print(Align.center(table))

    def _print_panel(self, message: str, title: str, tone: str) -> None:
        # Text 不解析 markup，消息里的方括号原样输出
        self.console.print(Panel(Text(message, style=self.theme[tone]), title=title, style=self.theme['border']))

    def print_error(self, message: str) -> None:
        self._print_panel(message, "❌ 错误", 'warning')

    def print_success(self, message: str) -> None:
        self._print_panel(message, "✅ 完成", 'success')

    def print_info(self, message: str) -> None:
        self._print_panel(message, "ℹ️ 信息", 'info')

    def print_header(self, title: str) -> None:
        """打印程序头部"""
        self.console.print(Rule(Text(f"🔍 {title}", style=self.theme['title']), style=self.theme['title']))

    def show_progress(self) -> Progress:
        """显示进度条"""
        return Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            console=self.console,
            transient=True,
        )

    def print_outputs(self, paths: List[str]) -> None:
        self.print_success("已写出:\n" + "\n".join(paths))
