"""
Escrita atômica de artefatos JSON e CSV
"""
import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

import config


def _write_atomic(caminho: Path, conteudo: str) -> Path:
    """
    Escreve num arquivo temporário e move para o destino só no final,
    para nunca deixar saída parcial
    """
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    fd, temporario = tempfile.mkstemp(dir=caminho.parent, prefix='.tmp-', suffix=caminho.suffix)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(conteudo)
        os.replace(temporario, caminho)
    except BaseException:
        if os.path.exists(temporario):
            os.remove(temporario)
        raise
    return caminho


def write_json(caminho: Path, dados: Dict) -> Path:
    return _write_atomic(caminho, json.dumps(dados, indent=2, ensure_ascii=False, allow_nan=False) + '\n')


def write_csv(
    caminho: Path,
    cabecalho: Sequence[str],
    linhas: Iterable[Sequence],
    config_hash: Optional[str] = None,
) -> Path:
    """
    Escreve CSV com as linhas de comentário de rastreabilidade no topo

    Args:
        caminho: Arquivo de destino
        cabecalho: Nomes das colunas
        linhas: Linhas de dados
        config_hash: Hash da configuração que gerou os dados
    """
    buffer = io.StringIO()
    buffer.write(f'# config_hash={config_hash or ""}\n')
    buffer.write(f'# constants_version={config.CONSTANTS_VERSION}\n')
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(cabecalho)
    for linha in linhas:
        writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in linha])
    return _write_atomic(caminho, buffer.getvalue())


def read_csv(caminho: Path):
    """
    Lê um CSV escrito por write_csv

    Returns:
        (metadados, cabeçalho, linhas)
    """
    metadados = {}
    with open(caminho, encoding='utf-8', newline='') as f:
        linhas = f.read().splitlines()
    dados = []
    for linha in linhas:
        if linha.startswith('#'):
            chave, _, valor = linha[1:].strip().partition('=')
            metadados[chave] = valor
        else:
            dados.append(linha)
    leitor = list(csv.reader(dados))
    return metadados, leitor[0], leitor[1:]
