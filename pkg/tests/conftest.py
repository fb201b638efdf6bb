import json
from importlib import resources

import pytest

from scenegen.opendrive import parse_opendrive
from scenegen.schema import AgentPlan, ScenePlan


def map_text(name: str) -> str:
    return (resources.files("scenegen") / "maps" / f"{name}.xodr").read_text()


@pytest.fixture(scope="session")
def crossroads():
    return parse_opendrive(map_text("crossroads"))


@pytest.fixture(scope="session")
def ranking_graph():
    return parse_opendrive(map_text("ranking"))


@pytest.fixture(scope="session")
def parade():
    return parse_opendrive(map_text("parade"))


def agent(**kw) -> AgentPlan:
    base = dict(
        type="car",
        is_ego=False,
        action="go straight",
        behavior="normal",
        pos_id=0,
        road_type="driving",
        relative_to_ego="front",
        distance=None,
    )
    base.update(kw)
    return AgentPlan(**base)


def make_plan(agents, at_junction=False, weather=("clear", "noon")) -> ScenePlan:
    return ScenePlan(weather=weather, at_junction=at_junction, agents=tuple(agents))


@pytest.fixture
def golden_plan():
    """The worked four-agent plan: ego turning right with a front-right car,
    a left-turn-road car, and a shoulder pedestrian."""
    return make_plan(
        [
            agent(is_ego=True, action="turn right", pos_id=1, relative_to_ego="none"),
            agent(action="turn right", pos_id=0, relative_to_ego="front right"),
            agent(action="turn left", pos_id=0, relative_to_ego="road of left turn"),
            agent(
                type="pedestrian",
                action="cross the road",
                pos_id=0,
                road_type="shoulder",
                relative_to_ego="right",
            ),
        ],
        at_junction=True,
    )


@pytest.fixture
def golden_plan_payload(golden_plan):
    return json.loads(json.dumps(golden_plan.to_payload()))


MINIMAL_XODR = """<?xml version="1.0" standalone="yes"?>
<OpenDRIVE>
 <header revMajor="1" revMinor="4" name="minimal"/>
 <road id="1" length="50.0" junction="-1">
  <planView>
   <geometry s="0.0" x="0.0" y="0.0" hdg="0.0" length="50.0"><line/></geometry>
  </planView>
  <lanes>
   <laneSection s="0.0">
   <center><lane id="0" type="none"/></center>
   <right>
    <lane id="-1" type="driving"><width a="3.5"/></lane>
    <lane id="-2" type="driving"><width a="3.5"/></lane>
   </right>
   </laneSection>
  </lanes>
 </road>
</OpenDRIVE>
"""

# Crossing with opposing approaches (1 north-bound, 2 south-bound) used for
# the unprotected-left differential: 1 can turn left across 2's straight path.
UNPROTECTED_LEFT_XODR = """<?xml version="1.0" standalone="yes"?>
<OpenDRIVE>
 <header revMajor="1" revMinor="4" name="ulturn"/>
 <road id="1" length="50.0" junction="-1">
  <link><successor elementType="junction" elementId="9"/></link>
  <planView><geometry s="0.0" x="0.0" y="-60.0" hdg="1.5707963267948966" length="50.0"><line/></geometry></planView>
  <lanes><laneSection s="0.0">
  <center><lane id="0" type="none"/></center>
  <right><lane id="-1" type="driving"><width a="3.5"/></lane></right>
  </laneSection></lanes>
 </road>
 <road id="2" length="50.0" junction="-1">
  <link><successor elementType="junction" elementId="9"/></link>
  <planView><geometry s="0.0" x="0.0" y="60.0" hdg="-1.5707963267948966" length="50.0"><line/></geometry></planView>
  <lanes><laneSection s="0.0">
  <center><lane id="0" type="none"/></center>
  <right><lane id="-1" type="driving"><width a="3.5"/></lane></right>
  </laneSection></lanes>
 </road>
 <road id="3" length="50.0" junction="-1">
  <link><predecessor elementType="junction" elementId="9"/></link>
  <planView><geometry s="0.0" x="-10.0" y="0.0" hdg="3.141592653589793" length="50.0"><line/></geometry></planView>
  <lanes><laneSection s="0.0">
  <center><lane id="0" type="none"/></center>
  <right><lane id="-1" type="driving"><width a="3.5"/></lane></right>
  </laneSection></lanes>
 </road>
 <road id="4" length="50.0" junction="-1">
  <link><predecessor elementType="junction" elementId="9"/></link>
  <planView><geometry s="0.0" x="0.0" y="10.0" hdg="1.5707963267948966" length="50.0"><line/></geometry></planView>
  <lanes><laneSection s="0.0">
  <center><lane id="0" type="none"/></center>
  <right><lane id="-1" type="driving"><width a="3.5"/></lane></right>
  </laneSection></lanes>
 </road>
 <road id="5" length="50.0" junction="-1">
  <link><predecessor elementType="junction" elementId="9"/></link>
  <planView><geometry s="0.0" x="0.0" y="-10.0" hdg="-1.5707963267948966" length="50.0"><line/></geometry></planView>
  <lanes><laneSection s="0.0">
  <center><lane id="0" type="none"/></center>
  <right><lane id="-1" type="driving"><width a="3.5"/></lane></right>
  </laneSection></lanes>
 </road>
 <junction id="9">
  <connection id="0" incomingRoad="1" connectingRoad="3" contactPoint="start"><laneLink from="-1" to="-1"/></connection>
  <connection id="1" incomingRoad="1" connectingRoad="4" contactPoint="start"><laneLink from="-1" to="-1"/></connection>
  <connection id="2" incomingRoad="2" connectingRoad="5" contactPoint="start"><laneLink from="-1" to="-1"/></connection>
 </junction>
</OpenDRIVE>
"""


@pytest.fixture(scope="session")
def unprotected_left():
    return parse_opendrive(UNPROTECTED_LEFT_XODR)


# Stem road heading north into a junction; exits lead west (left) and east (right).
T_JUNCTION_XODR = """<?xml version="1.0" standalone="yes"?>
<OpenDRIVE>
 <header revMajor="1" revMinor="4" name="tee"/>
 <road id="1" length="40.0" junction="-1">
  <link><successor elementType="junction" elementId="7"/></link>
  <planView>
   <geometry s="0.0" x="0.0" y="-50.0" hdg="1.5707963267948966" length="40.0"><line/></geometry>
  </planView>
  <lanes>
   <laneSection s="0.0">
   <center><lane id="0" type="none"/></center>
   <right><lane id="-1" type="driving"><width a="3.5"/></lane></right>
   </laneSection>
  </lanes>
 </road>
 <road id="2" length="30.0" junction="-1">
  <link><predecessor elementType="junction" elementId="7"/></link>
  <planView>
   <geometry s="0.0" x="-10.0" y="0.0" hdg="3.141592653589793" length="30.0"><line/></geometry>
  </planView>
  <lanes>
   <laneSection s="0.0">
   <center><lane id="0" type="none"/></center>
   <right><lane id="-1" type="driving"><width a="3.5"/></lane></right>
   </laneSection>
  </lanes>
 </road>
 <road id="3" length="30.0" junction="-1">
  <link><predecessor elementType="junction" elementId="7"/></link>
  <planView>
   <geometry s="0.0" x="10.0" y="0.0" hdg="0.0" length="30.0"><line/></geometry>
  </planView>
  <lanes>
   <laneSection s="0.0">
   <center><lane id="0" type="none"/></center>
   <right><lane id="-1" type="driving"><width a="3.5"/></lane></right>
   </laneSection>
  </lanes>
 </road>
 <junction id="7">
  <connection id="0" incomingRoad="1" connectingRoad="2" contactPoint="start">
   <laneLink from="-1" to="-1"/>
  </connection>
  <connection id="1" incomingRoad="1" connectingRoad="3" contactPoint="start">
   <laneLink from="-1" to="-1"/>
  </connection>
 </junction>
</OpenDRIVE>
"""
