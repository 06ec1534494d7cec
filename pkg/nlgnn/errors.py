"""
异常定义
所有异常同时继承对应的内置异常，调用方可以按任意一层捕获
"""

from typing import Optional


class NLGNNError(Exception):
    """nlgnn 异常基类"""


class ShapeError(NLGNNError, ValueError):
    """张量维度不匹配"""


class ConfigError(NLGNNError, ValueError):
    """非法配置（卷积核为偶数、概率越界、超参数不在网格内等）"""


class ContractError(NLGNNError, RuntimeError):
    """违反前置/后置条件"""


class IngestionError(NLGNNError, ValueError):
    """图数据文件解析失败"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class SplitError(NLGNNError, ValueError):
    """数据划分失败"""

    def __init__(self, message: str, label: Optional[int] = None):
        self.label = label
        super().__init__(message)


class GenerationError(NLGNNError, ValueError):
    """合成图参数不可行"""


class MetricError(NLGNNError, ValueError):
    """指标无定义"""


class TrainingError(NLGNNError, RuntimeError):
    """训练发散（损失或梯度出现 NaN/Inf）"""

    def __init__(self, message: str, epoch: Optional[int] = None, param: Optional[str] = None):
        self.epoch = epoch
        self.param = param
        super().__init__(message)
