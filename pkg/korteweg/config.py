"""Загрузка переменных окружения и настройки приложения."""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Настройки окружения (логирование, параллелизм). На численные результаты не влияют."""

    log_level: str = "INFO"
    # Число процессов для параллельного прогона κ̄-свипа (1 — последовательно)
    max_workers: int = 1
    default_output_dir: str = "runs"

    model_config = SettingsConfigDict(
        env_prefix="KORTEWEG_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


# Глобальный экземпляр настроек
settings = Settings()
