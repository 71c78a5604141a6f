#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Persistencia (store) y orquestación del etiquetado."""
