from sqlalchemy import Column, Integer, String, Float, DateTime, ForeignKey, Boolean, Text
from sqlalchemy.orm import relationship
from sqlalchemy.sql import func
from database import Base


class ExperimentRun(Base):
    __tablename__ = "experiment_runs"

    id = Column(Integer, primary_key=True, index=True)
    master_seed = Column(String(20))  # uint64 라 문자열로 저장
    config_json = Column(Text)
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    trials = relationship("TrialRow", back_populates="run", cascade="all, delete-orphan")


class TrialRow(Base):
    __tablename__ = "trials"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("experiment_runs.id", ondelete="CASCADE"), index=True)
    trial_id = Column(Integer, index=True)
    seed = Column(String(20))
    eps_target = Column(Float)
    noise_level = Column(Float)
    eps_sub_rel = Column(Float)
    eps_full_rel = Column(Float)
    abs_sub = Column(Float)
    abs_full = Column(Float)
    delta_s = Column(Float)
    delta_2s = Column(Float)
    delta_4s = Column(Float)
    ric_method = Column(String(100))
    alpha_s = Column(Float)
    beta_s = Column(Float)
    cond_bp_ric = Column(Boolean)
    cond_bp_tail = Column(Boolean)
    cond_cs_ric = Column(Boolean)
    cond_cs_tail = Column(Boolean)
    err_cosamp = Column(Float, nullable=True)
    err_bpdn = Column(Float, nullable=True)
    bracket_cosamp = Column(Float)
    eps_total_bp = Column(Float, nullable=True)
    iters_cosamp = Column(Integer, nullable=True)
    iters_bpdn = Column(Integer, nullable=True)
    conv_cosamp = Column(Boolean, nullable=True)
    conv_bpdn = Column(Boolean, nullable=True)
    # 적합용 부가 값
    margin_bp_ric = Column(Float, nullable=True)
    margin_bp_tail = Column(Float, nullable=True)
    margin_cs_ric = Column(Float, nullable=True)
    margin_cs_tail = Column(Float, nullable=True)
    bracket_cosamp_rel = Column(Float, nullable=True)
    bp_tail_term = Column(Float, nullable=True)
    bp_radius = Column(Float, nullable=True)

    run = relationship("ExperimentRun", back_populates="trials")
