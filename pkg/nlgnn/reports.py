"""
结果报表：CSV 表格 + 同名 JSON 附带文件

JSON 结构固定为 {command, config, seed, environment, results}，键排序输出，
同一种子下非计时内容逐字节一致。
"""

import csv
import json
import logging
import os
import platform
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import scipy

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def environment_descriptor(threads: Optional[int] = None) -> Dict[str, Any]:
    """
    运行环境描述

    参数:
        threads: 声明的线程数；缺省读取 OMP_NUM_THREADS
    """
    if threads is None:
        declared = os.environ.get("OMP_NUM_THREADS")
        threads = int(declared) if declared and declared.isdigit() else None
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
        "cpu_count": os.cpu_count(),
        "threads": threads,
        "build": "debug" if sys.flags.debug else "release",
    }


def _plain(value: Any) -> Any:
    """把 numpy 标量/数组转换为 JSON 可序列化的内置类型"""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def write_csv(path: PathLike, fields: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
    """按给定表头写 CSV（多余的键忽略）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(fields), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _plain(v) for k, v in row.items()})
    logger.info("已写出 %s", path)
    return path


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def write_sidecar(csv_path: PathLike, command: str, config: Mapping[str, Any], seed: Optional[int],
                  results: Any, threads: Optional[int] = None) -> Path:
    """
    在 CSV 旁写同名 .json

    返回:
        JSON 文件路径
    """
    path = Path(csv_path).with_suffix(".json")
    payload = {
        "command": command,
        "config": _plain(config),
        "seed": seed,
        "environment": environment_descriptor(threads),
        "results": _plain(results),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_report(csv_path: PathLike, fields: Sequence[str], rows: Sequence[Mapping[str, Any]],
                 command: str, config: Mapping[str, Any], seed: Optional[int],
                 results: Any = None, threads: Optional[int] = None) -> Path:
    """CSV 与 JSON 一起写出；results 缺省为 CSV 行本身"""
    path = write_csv(csv_path, fields, rows)
    write_sidecar(path, command, config, seed, list(rows) if results is None else results, threads)
    return path
