from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker
import os
from dotenv import load_dotenv

# 환경 변수 로드
load_dotenv()

# 결과 저장소 (sweep --db 로 덮어쓸 수 있음)
SQLALCHEMY_DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///./csrecovery.db")

Base = declarative_base()


def make_engine(url: str = None):
    url = url or SQLALCHEMY_DATABASE_URL
    if url.startswith("sqlite"):
        # sqlite 는 풀 설정 없이, 스레드 검사만 끈다
        return create_engine(url, connect_args={"check_same_thread": False}, echo=False)
    return create_engine(
        url,
        pool_size=5,
        max_overflow=10,
        pool_timeout=30,
        pool_recycle=1800,
        pool_pre_ping=True,  # 연결이 유효한지 확인
        echo=False,
    )


def make_session_factory(url: str = None):
    """테이블을 만들고 세션 팩토리를 돌려준다"""
    import models  # noqa: F401  (테이블 등록)

    engine = make_engine(url)
    Base.metadata.create_all(bind=engine)
    return sessionmaker(autocommit=False, autoflush=False, bind=engine)


def get_db(url: str = None):
    SessionLocal = make_session_factory(url)
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
