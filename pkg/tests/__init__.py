# -*- coding: utf-8 -*-
"""
테스트 패키지
"""

