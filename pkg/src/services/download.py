import asyncio
import logging
import os
from pathlib import Path
from typing import Optional

import httpx

from src.models import Failure, Result, Success
from src.models.errors import DownloadError
from src.services.config import config
from src.services.streams.idx import FASHION_MNIST_FILES

logger = logging.getLogger("Download")


async def _fetch_file(client: httpx.AsyncClient, url: str, target: Path, timeout: float) -> Result[Path, DownloadError]:
    """Downloads one file to `target` via a temporary sibling, renamed on success."""
    partial = target.with_name(target.name + ".part")
    try:
        response = await client.get(url, timeout=timeout)
        response.raise_for_status()
        partial.write_bytes(response.content)
        os.replace(partial, target)
        return Success(target)
    except httpx.TimeoutException:
        return Failure(DownloadError(f"Request timeout fetching {url}."))
    except httpx.HTTPStatusError as e:
        return Failure(DownloadError(f"HTTP {e.response.status_code} fetching {url}."))
    except httpx.RequestError as e:
        return Failure(DownloadError(f"Request failed for {url}: {e}"))
    except OSError as e:
        return Failure(DownloadError(f"Cannot write {target}: {e}"))
    finally:
        if partial.exists():
            partial.unlink()


async def fetch_fashion_mnist(
    root: Optional[str] = None,
    base_url: Optional[str] = None,
    timeout: Optional[float] = None,
    /,
    transport: Optional[httpx.AsyncBaseTransport] = None,
) -> Result[list[Path], DownloadError]:
    """Fetches the four gzipped Fashion-MNIST IDX files into the dataset root.

    Files already present are skipped. Downloads run concurrently; the first
    failure is returned after every request has settled.
    """
    root_dir = Path(root or config.dataset_root())
    base_url = base_url or config.section_value("datasets", "fashion_mnist_url")
    timeout = timeout or float(config.section_value("datasets", "download_timeout"))
    try:
        root_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        return Failure(DownloadError(f"Cannot create {root_dir}: {e}"))

    targets = [root_dir / f"{stem}.gz" for stem in FASHION_MNIST_FILES.values()]
    pending = [t for t in targets if not t.exists() and not (root_dir / t.stem).exists()]
    if not pending:
        logger.info(f"All Fashion-MNIST files already present in {root_dir}")
        return Success(targets)

    async with httpx.AsyncClient(transport=transport) as client:
        results = await asyncio.gather(
            *(_fetch_file(client, base_url.rstrip("/") + "/" + t.name, t, timeout) for t in pending)
        )
    for result in results:
        if result.is_failure():
            logger.error(result.unwrap_err().message)
            return Failure(result.unwrap_err())
    logger.info(f"Downloaded {len(pending)} file(s) into {root_dir}")
    return Success(targets)
