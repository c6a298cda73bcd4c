# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/models.py
# ----------------------------------------------------------------------------------
# Purpose:
# Database models for the run registry: one row per CLI run and one row per
# reported metric value.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from datetime import datetime
from enum import IntEnum
from typing import Optional

from sqlalchemy import BigInteger, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, relationship


class RunStatusEnum(IntEnum):
    """Enum for run status values."""

    NEW = 1
    RUNNING = 2
    FINISHED = 3
    ERROR = 4


class Base(DeclarativeBase):
    """Base class for all database models."""

    pass


class RunRecord(Base):
    """Model for registered pipeline runs."""

    __tablename__ = "run"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    command: Mapped[str] = mapped_column(String(64), nullable=False)
    seed: Mapped[int] = mapped_column(BigInteger, nullable=False)
    config_digest: Mapped[str] = mapped_column(String(64), nullable=False)
    status: Mapped[int] = mapped_column(Integer, nullable=False, default=RunStatusEnum.NEW)
    started_at: Mapped[Optional[datetime]] = mapped_column(DateTime, nullable=True)
    finished_at: Mapped[Optional[datetime]] = mapped_column(DateTime, nullable=True)
    out_dir: Mapped[str] = mapped_column(Text, nullable=True)

    metrics: Mapped[list["MetricRecord"]] = relationship("MetricRecord", back_populates="run", cascade="all, delete-orphan")


class MetricRecord(Base):
    """Model for a single metric value of a run; `class_label` is empty for aggregate metrics."""

    __tablename__ = "metric"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[int] = mapped_column(Integer, ForeignKey("run.id"), nullable=False)
    config_name: Mapped[str] = mapped_column(String(64), nullable=False, default="")
    name: Mapped[str] = mapped_column(String(64), nullable=False)
    class_label: Mapped[str] = mapped_column(String(32), nullable=False, default="")
    value: Mapped[float] = mapped_column(Float, nullable=False)

    run: Mapped["RunRecord"] = relationship("RunRecord", back_populates="metrics")
