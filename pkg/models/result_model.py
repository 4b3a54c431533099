"""
Model para indexar os registros de resultados no banco de dados SQLite
"""
import json
import logging
import sqlite3
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional

import config

logger = logging.getLogger(__name__)


class ResultRecordModel:
    """
    Índice dos registros emitidos pelos comandos, chaveado por
    (config_hash, command)
    """

    def __init__(self, db_path: str = None):
        """
        Inicializa o model com o caminho do banco de dados

        Args:
            db_path: Caminho do banco de dados SQLite
        """
        self.db_path = str(db_path or config.DATABASE_PATH)
        Path(self.db_path).parent.mkdir(parents=True, exist_ok=True)
        self._criar_tabela()

    def _criar_tabela(self):
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute("""
                CREATE TABLE IF NOT EXISTS registros (
                    config_hash TEXT NOT NULL,
                    command TEXT NOT NULL,
                    created_at TEXT NOT NULL,
                    tool_version TEXT,
                    constants_version TEXT,
                    payload TEXT,
                    artifacts TEXT,
                    PRIMARY KEY (config_hash, command)
                )
            """)
            conn.commit()

    def inserir(self, config_hash: str, command: str, payload: Dict, artifacts: List[str]) -> bool:
        """
        Insere ou atualiza um registro

        Args:
            config_hash: Hash SHA-256 da configuração
            command: Nome do comando que gerou o registro
            payload: Resumo numérico do resultado
            artifacts: Caminhos dos arquivos escritos

        Returns:
            True se inseriu/atualizou com sucesso, False caso contrário
        """
        try:
            with sqlite3.connect(self.db_path) as conn:
                conn.execute("""
                    INSERT OR REPLACE INTO registros (
                        config_hash, command, created_at, tool_version,
                        constants_version, payload, artifacts
                    ) VALUES (?, ?, ?, ?, ?, ?, ?)
                """, (
                    config_hash,
                    command,
                    datetime.now(timezone.utc).isoformat(timespec='microseconds'),
                    config.TOOL_VERSION,
                    config.CONSTANTS_VERSION,
                    json.dumps(payload, allow_nan=False),
                    json.dumps([str(a) for a in artifacts]),
                ))
                conn.commit()
                return True
        except (sqlite3.Error, ValueError, TypeError) as e:
            logger.error('Erro ao inserir registro %s/%s: %s', command, config_hash, e)
            return False

    def buscar_por_hash(self, config_hash: str, command: Optional[str] = None) -> List[Dict]:
        """Registros de uma configuração, opcionalmente de um único comando"""
        consulta = 'SELECT * FROM registros WHERE config_hash = ?'
        parametros = [config_hash]
        if command:
            consulta += ' AND command = ?'
            parametros.append(command)
        return self._consultar(consulta + ' ORDER BY created_at DESC', parametros)

    def buscar_ultimo(self, command: Optional[str] = None) -> Optional[Dict]:
        """
        Registro mais recente

        Returns:
            Dicionário com o registro ou None se o índice está vazio
        """
        if command:
            registros = self._consultar(
                'SELECT * FROM registros WHERE command = ? ORDER BY created_at DESC LIMIT 1', [command]
            )
        else:
            registros = self._consultar('SELECT * FROM registros ORDER BY created_at DESC LIMIT 1', [])
        return registros[0] if registros else None

    def buscar_todos(self, limite: Optional[int] = None) -> List[Dict]:
        """
        Todos os registros, do mais recente ao mais antigo

        Args:
            limite: Número máximo de registros a retornar
        """
        if limite:
            return self._consultar('SELECT * FROM registros ORDER BY created_at DESC LIMIT ?', [limite])
        return self._consultar('SELECT * FROM registros ORDER BY created_at DESC', [])

    def _consultar(self, consulta: str, parametros: List) -> List[Dict]:
        try:
            with sqlite3.connect(self.db_path) as conn:
                conn.row_factory = sqlite3.Row
                rows = conn.execute(consulta, parametros).fetchall()
                return [self._row_to_dict(row) for row in rows]
        except sqlite3.Error as e:
            logger.error('Erro ao consultar registros: %s', e)
            return []

    def _row_to_dict(self, row: sqlite3.Row) -> Dict:
        registro = dict(row)
        # Campos JSON de volta para dict/list
        for campo in ('payload', 'artifacts'):
            if registro.get(campo):
                registro[campo] = json.loads(registro[campo])
        return registro
