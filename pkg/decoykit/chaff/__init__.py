from decoykit.chaff.complement import BitComplement
from decoykit.chaff.decoytext import DecoyText
from decoykit.chaff.randompayload import RandomPayload
from decoykit.chaff.strategy import ChaffStrategy
