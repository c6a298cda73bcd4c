# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/nn/specs.py
# ----------------------------------------------------------------------------------
# Purpose:
# Declarative descriptions of layers, reduce-split-transform-merge blocks and the
# two-branch fusion network. Specs are validated on construction and carry the
# closed-form parameter / FLOP formulas used by the accounting in network.py.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from dataclasses import dataclass, field
from enum import Enum

from uwb_har.nn.ops import NetworkError, output_size

__all__ = [
    "BRANCHES",
    "BlockSpec",
    "LayerSpec",
    "NUM_CLASSES",
    "NetworkSpec",
    "OpKind",
]

NUM_CLASSES = 7
BRANCHES = ("time", "freq")


class OpKind(Enum):
    CONV = "Conv"
    PCONV = "PConv"
    DCONV = "DConv"
    GCONV = "GConv"
    SCONV = "SConv"
    FC = "FC"
    RELU = "ReLU"
    SOFTMAX = "Softmax"
    CHANNEL_SPLIT = "ChannelSplit"
    CONCAT = "Concat"
    POOL = "Pool"
    SUBSAMPLE = "Subsample"


_SPATIAL_KINDS = {OpKind.CONV, OpKind.DCONV, OpKind.GCONV, OpKind.SCONV}


@dataclass(frozen=True)
class LayerSpec:
    op_kind: OpKind
    in_channels: int
    out_channels: int
    kernel: int = 1
    groups: int = 1
    dilation: int = 1
    stride: int = 1
    padding: str = "same"

    def __post_init__(self) -> None:
        if self.in_channels < 1 or self.out_channels < 1:
            raise NetworkError(f"{self.op_kind.value}: channel counts must be positive", operation="LayerSpec")
        if self.dilation < 1 or self.stride < 1:
            raise NetworkError(f"{self.op_kind.value}: dilation and stride must be >= 1", operation="LayerSpec")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise NetworkError(f"{self.op_kind.value}: kernel must be odd, got {self.kernel}", operation="LayerSpec")
        if self.padding != "same":
            raise NetworkError(f"only same padding is supported, got {self.padding!r}", operation="LayerSpec")
        if self.op_kind == OpKind.GCONV and (self.in_channels % self.groups or self.out_channels % self.groups):
            raise NetworkError(f"GConv: c_in={self.in_channels} and c_out={self.out_channels} must be divisible by G={self.groups}", operation="LayerSpec")
        if self.op_kind in (OpKind.DCONV, OpKind.RELU, OpKind.POOL, OpKind.SUBSAMPLE, OpKind.SOFTMAX) and self.in_channels != self.out_channels:
            raise NetworkError(f"{self.op_kind.value} keeps the channel count", operation="LayerSpec")
        if self.op_kind == OpKind.PCONV and self.kernel != 1:
            raise NetworkError("PConv has no spatial support", operation="LayerSpec")

    @property
    def param_count(self) -> int:
        k2 = self.kernel * self.kernel
        match self.op_kind:
            case OpKind.CONV:
                return k2 * self.in_channels * self.out_channels
            case OpKind.PCONV:
                return self.in_channels * self.out_channels
            case OpKind.DCONV:
                return k2 * self.in_channels
            case OpKind.GCONV:
                return k2 * self.in_channels * self.out_channels // self.groups
            case OpKind.SCONV:
                return k2 * self.in_channels + self.in_channels * self.out_channels
            case OpKind.FC:
                return self.in_channels * self.out_channels + self.out_channels
            case _:
                return 0

    def output_hw(self, height: int, width: int) -> tuple[int, int]:
        if self.op_kind in _SPATIAL_KINDS or self.op_kind == OpKind.SUBSAMPLE:
            return output_size(height, self.stride), output_size(width, self.stride)
        return height, width

    def flop_count(self, height: int, width: int) -> int:
        """2 FLOPs per multiply-accumulate at the layer's output resolution."""
        out_h, out_w = self.output_hw(height, width)
        pixels = out_h * out_w
        k2 = self.kernel * self.kernel
        match self.op_kind:
            case OpKind.CONV:
                macs = pixels * k2 * self.in_channels * self.out_channels
            case OpKind.PCONV:
                macs = pixels * self.in_channels * self.out_channels
            case OpKind.DCONV:
                macs = pixels * k2 * self.in_channels
            case OpKind.GCONV:
                macs = pixels * k2 * self.in_channels * self.out_channels // self.groups
            case OpKind.SCONV:
                macs = pixels * (k2 * self.in_channels + self.in_channels * self.out_channels)
            case OpKind.FC:
                macs = self.in_channels * self.out_channels
            case _:
                macs = 0
        return 2 * macs


@dataclass(frozen=True)
class BlockSpec:
    """Reduce (1x1 GConv) -> split -> dilated SConv on the first half -> concat -> merge (1x1 PConv) -> ReLU."""

    channels_in: int
    channels_out: int
    reduce_groups: int = 1
    kernel: int = 3
    dilation: int = 2
    stride: int = 2
    mid_channels: int | None = None

    def __post_init__(self) -> None:
        if self.mid_channels is None:
            object.__setattr__(self, "mid_channels", self.channels_out)
        if self.mid_channels % 2:
            raise NetworkError(f"block mid channels must be even for the split, got {self.mid_channels}", operation="BlockSpec")
        if self.channels_in % self.reduce_groups or self.mid_channels % self.reduce_groups:
            raise NetworkError(
                f"reduce GConv: c_in={self.channels_in} and c_mid={self.mid_channels} must be divisible by G={self.reduce_groups}",
                operation="BlockSpec",
            )
        # Validates the remaining fields (kernel parity, dilation, stride).
        self.layer_specs()

    @property
    def half_channels(self) -> int:
        return self.mid_channels // 2

    def layer_specs(self) -> dict[str, LayerSpec]:
        half = self.half_channels
        return {
            "reduce": LayerSpec(OpKind.GCONV, self.channels_in, self.mid_channels, groups=self.reduce_groups),
            "split": LayerSpec(OpKind.CHANNEL_SPLIT, self.mid_channels, self.mid_channels),
            "transform": LayerSpec(OpKind.SCONV, half, half, kernel=self.kernel, dilation=self.dilation, stride=self.stride),
            "passthrough": LayerSpec(OpKind.SUBSAMPLE, half, half, stride=self.stride),
            "concat": LayerSpec(OpKind.CONCAT, self.mid_channels, self.mid_channels),
            "merge": LayerSpec(OpKind.PCONV, self.mid_channels, self.channels_out),
            "relu": LayerSpec(OpKind.RELU, self.channels_out, self.channels_out),
        }

    @property
    def param_count(self) -> int:
        return sum(spec.param_count for spec in self.layer_specs().values())

    def output_hw(self, height: int, width: int) -> tuple[int, int]:
        return output_size(height, self.stride), output_size(width, self.stride)


@dataclass(frozen=True)
class NetworkSpec:
    """Two structurally independent branches of three blocks, pooled, concatenated and classified."""

    time_branch: tuple[BlockSpec, ...]
    freq_branch: tuple[BlockSpec, ...]
    head: tuple[int, ...] = (128, NUM_CLASSES)
    branches: tuple[str, ...] = BRANCHES
    pool_grid: tuple[int, int] = (5, 2)
    input_shape: tuple[int, int] = (400, 60)
    block_count: int = field(default=3, repr=False)

    def __post_init__(self) -> None:
        for name, blocks in (("time", self.time_branch), ("freq", self.freq_branch)):
            if len(blocks) != self.block_count:
                raise NetworkError(f"{name} branch needs {self.block_count} blocks, got {len(blocks)}", operation="NetworkSpec")
            if blocks[0].channels_in != 1:
                raise NetworkError(f"{name} branch must start from one input channel", operation="NetworkSpec")
            for previous, block in zip(blocks, blocks[1:]):
                if previous.channels_out != block.channels_in:
                    raise NetworkError(f"{name} branch: {previous.channels_out} channels feed a block expecting {block.channels_in}", operation="NetworkSpec")
        if not self.branches or len(set(self.branches)) != len(self.branches) or set(self.branches) - set(BRANCHES):
            raise NetworkError(f"branches must be a non-empty subset of {BRANCHES}, got {self.branches}", operation="NetworkSpec")
        if not self.head or self.head[-1] != NUM_CLASSES:
            raise NetworkError(f"head must end in {NUM_CLASSES} classes, got {self.head}", operation="NetworkSpec")
        for name in self.branches:
            height, width = self.feature_hw(name)
            if not (1 <= self.pool_grid[0] <= height and 1 <= self.pool_grid[1] <= width):
                raise NetworkError(f"pool grid {self.pool_grid} exceeds the {height}x{width} {name} feature map", operation="NetworkSpec")

    @classmethod
    def default(
        cls,
        kernel: int = 3,
        dilation: int = 2,
        channels: tuple[int, ...] = (16, 32, 64),
        reduce_groups: tuple[int, ...] = (1, 4, 4),
        stride: int = 2,
        head_hidden: int = 128,
        branches: tuple[str, ...] = BRANCHES,
        pool_grid: tuple[int, int] = (5, 2),
        input_shape: tuple[int, int] = (400, 60),
    ) -> "NetworkSpec":
        """Both branches share one block layout but never share weights."""
        if len(channels) != len(reduce_groups):
            raise NetworkError("channels and reduce_groups must have the same length", operation="NetworkSpec.default")
        blocks = []
        previous = 1
        for width, groups in zip(channels, reduce_groups):
            blocks.append(BlockSpec(previous, width, reduce_groups=groups, kernel=kernel, dilation=dilation, stride=stride))
            previous = width
        layout = tuple(blocks)
        return cls(
            time_branch=layout,
            freq_branch=layout,
            head=(head_hidden, NUM_CLASSES),
            branches=tuple(branches),
            pool_grid=tuple(pool_grid),
            input_shape=tuple(input_shape),
            block_count=len(layout),
        )

    def blocks(self, branch: str) -> tuple[BlockSpec, ...]:
        return self.time_branch if branch == "time" else self.freq_branch

    def feature_hw(self, branch: str) -> tuple[int, int]:
        height, width = self.input_shape
        for block in self.blocks(branch):
            height, width = block.output_hw(height, width)
        return height, width

    def branch_features(self, branch: str) -> int:
        return self.pool_grid[0] * self.pool_grid[1] * self.blocks(branch)[-1].channels_out

    @property
    def fused_features(self) -> int:
        return sum(self.branch_features(name) for name in self.branches)

    def head_specs(self) -> list[LayerSpec]:
        specs = []
        previous = self.fused_features
        for index, width in enumerate(self.head):
            specs.append(LayerSpec(OpKind.FC, previous, width))
            if index < len(self.head) - 1:
                specs.append(LayerSpec(OpKind.RELU, width, width))
            previous = width
        return specs
