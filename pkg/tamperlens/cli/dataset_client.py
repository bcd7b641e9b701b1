import io
import logging
import zipfile
from pathlib import Path
from typing import Optional, Union

import httpx

from tamperlens.errors import DownloadError


class DatasetClient:
    """Асинхронная загрузка архива датасета по HTTP"""

    def __init__(self, timeout: float = 60.0, transport: Optional[httpx.AsyncBaseTransport] = None):
        self.timeout = timeout
        self.transport = transport
        self._client: Optional[httpx.AsyncClient] = None

    def _get_headers(self) -> dict:
        return {"Accept": "application/zip, application/octet-stream"}

    def _new_client(self) -> httpx.AsyncClient:
        return httpx.AsyncClient(timeout=self.timeout, transport=self.transport, follow_redirects=True)

    async def __aenter__(self):
        self._client = self._new_client()
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        if self._client:
            await self._client.aclose()
            self._client = None

    async def _get_client(self) -> httpx.AsyncClient:
        """Возвращает HTTP-клиент, создавая новый если необходимо"""
        if not self._client:
            return self._new_client()
        return self._client

    async def _make_request(self, method: str, url: str, **kwargs) -> httpx.Response:
        """Выполняет HTTP-запрос и обрабатывает закрытие клиента"""
        client = await self._get_client()
        created_new = client is not self._client

        try:
            response = await client.request(method.upper(), url, headers=self._get_headers(), **kwargs)
            logging.info(f"HTTP {method.upper()} {url} - Status: {response.status_code}")

            if response.status_code >= 400:
                logging.error(f"Download error {response.status_code}: {response.text[:200]}")
                raise DownloadError(f"{url} returned HTTP {response.status_code}")
            return response
        except httpx.HTTPError as e:
            logging.error(f"Request to {url} failed: {e}")
            raise DownloadError(f"request to {url} failed: {e}")
        finally:
            if created_new:
                await client.aclose()

    async def download(self, url: str) -> bytes:
        """
        Скачивает архив целиком.

        Args:
            url (str): Адрес архива.

        Returns:
            bytes: Содержимое ответа.
        """
        response = await self._make_request("get", url)
        return response.content

    async def fetch_dataset(self, url: str, out_dir: Union[str, Path]) -> int:
        """
        Скачивает zip-архив и распаковывает его в out_dir.

        Returns:
            int: Число распакованных файлов.
        """
        payload = await self.download(url)
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        try:
            with zipfile.ZipFile(io.BytesIO(payload)) as archive:
                files = [info for info in archive.infolist() if not info.is_dir()]
                archive.extractall(out_dir)
        except zipfile.BadZipFile as e:
            raise DownloadError(f"{url} is not a zip archive: {e}")

        logging.info(f"Extracted {len(files)} files from {url} into {out_dir}")
        return len(files)
